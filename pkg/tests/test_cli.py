import pytest

from segvsa import Codebook, OnlineLearner, RngStream, SpaceConfig, random_code
from segvsa.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    rows = [line.split("\t") for line in out.splitlines()]
    return code, rows, err


def field(rows, key):
    return [r[1:] for r in rows if r[0] == key]


@pytest.fixture
def book_path(tmp_path, capsys):
    path = tmp_path / "book.hvb"
    assert main(["rand", "4", "-o", str(path), "--seed", "3"]) == 0
    capsys.readouterr()
    return path


class TestRand:
    def test_writes_entries(self, tmp_path, capsys):
        code, rows, _ = run(capsys, "rand", 3, "-o", tmp_path / "r.hvb")
        assert code == 0 and field(rows, "entries") == [["3"]]
        assert Codebook.load(tmp_path / "r.hvb").labels == ["c0", "c1", "c2"]

    def test_zero(self, tmp_path, capsys):
        code, rows, _ = run(capsys, "rand", 0, "-o", tmp_path / "r.hvb")
        assert code == 0 and len(Codebook.load(tmp_path / "r.hvb")) == 0

    def test_same_seed_identical(self, tmp_path, capsys):
        for name in ("a", "b"):
            run(capsys, "rand", 5, "-o", tmp_path / f"{name}.hvb", "--seed", 9)
        run(capsys, "rand", 5, "-o", tmp_path / "c.hvb", "--seed", 10)
        assert (tmp_path / "a.hvb").read_bytes() == (tmp_path / "b.hvb").read_bytes()
        assert (tmp_path / "a.hvb").read_bytes() != (tmp_path / "c.hvb").read_bytes()

    def test_bad_space(self, tmp_path, capsys):
        code, _, err = run(capsys, "rand", 1, "-o", tmp_path / "r.hvb", "--dim", 100, "--segwidth", 7)
        assert code == 2 and "error" in err


class TestAlgebra:
    def test_bind_with_inverse_is_unit(self, tmp_path, book_path, capsys):
        inv = tmp_path / "inv.hvb"
        assert run(capsys, "algebra", "inverse", "--book", book_path, "--inputs", "c0", "--label", "c0inv", "-o", inv)[0] == 0
        code, rows, _ = run(
            capsys, "algebra", "bind", "--book", book_path, "--book", inv, "--inputs", "c0", "c0inv", "-o", tmp_path / "u.hvb"
        )
        assert code == 0 and field(rows, "unit") == [["yes"]]

    def test_release_recovers(self, tmp_path, book_path, capsys):
        bound = tmp_path / "ab.hvb"
        run(capsys, "algebra", "bind", "--book", book_path, "--inputs", "c0", "c1", "--label", "ab", "-o", bound)
        code, rows, _ = run(
            capsys, "algebra", "release", "--book", book_path, "--book", bound,
            "--inputs", "ab", "c1", "--compare", "c0", "-o", tmp_path / "r.hvb",
        )
        assert code == 0
        assert ["c0", "256"] in field(rows, "overlap")

    def test_bundle_overlap(self, tmp_path, book_path, capsys):
        code, rows, _ = run(capsys, "algebra", "bundle", "--book", book_path, "--inputs", "c0", "c1", "-o", tmp_path / "b.hvb")
        assert code == 0
        for _, val in field(rows, "overlap"):
            assert 96 <= int(val) <= 160

    def test_power_needs_exponent(self, tmp_path, book_path, capsys):
        code, _, _ = run(capsys, "algebra", "power", "--book", book_path, "--inputs", "c0", "-o", tmp_path / "p.hvb")
        assert code == 2
        code, rows, _ = run(
            capsys, "algebra", "power", "--book", book_path, "--inputs", "c0", "--exponent", 0, "-o", tmp_path / "p.hvb"
        )
        assert code == 0 and field(rows, "unit") == [["yes"]]

    def test_unknown_label(self, tmp_path, book_path, capsys):
        code, _, _ = run(capsys, "algebra", "inverse", "--book", book_path, "--inputs", "zz", "-o", tmp_path / "x.hvb")
        assert code == 2

    def test_arity(self, tmp_path, book_path, capsys):
        code, _, _ = run(capsys, "algebra", "release", "--book", book_path, "--inputs", "c0", "-o", tmp_path / "x.hvb")
        assert code == 2

    def test_missing_book(self, tmp_path, capsys):
        code, _, err = run(capsys, "algebra", "inverse", "--book", tmp_path / "nope.hvb", "--inputs", "c0", "-o", tmp_path / "x.hvb")
        assert code == 3


def test_demo_mexico(capsys):
    code, rows, _ = run(capsys, "demo-mexico")
    assert code == 0
    assert field(rows, "result") == [["pass"]]
    assert sum(r[-1] == "ok" for r in rows) == 10


class TestRoundtrip:
    def test_set_and_sequence(self, tmp_path, capsys):
        run(capsys, "rand", 200, "-o", tmp_path / "b.hvb", "--prefix", "w")
        code, rows, _ = run(capsys, "roundtrip", "set", "--book", tmp_path / "b.hvb", "--inputs", "w1", "w5", "w9")
        assert code == 0 and field(rows, "exact") == [["yes"]]
        code, rows, _ = run(capsys, "roundtrip", "sequence", "--book", tmp_path / "b.hvb", "--inputs", "w9", "w1", "w5")
        assert code == 0 and field(rows, "recovered") == [["w9 w1 w5"]]


class TestEmbed:
    @pytest.fixture
    def corpus(self, tmp_path):
        path = tmp_path / "corpus.txt"
        path.write_text("alpha beta\n\n" * 200, encoding="utf-8")
        return path

    def test_train_and_query(self, tmp_path, corpus, capsys):
        model = tmp_path / "m.hvm"
        code, rows, _ = run(capsys, "embed", "train", corpus, "-m", model)
        assert code == 0 and field(rows, "tokens") == [["400"]] and field(rows, "documents") == [["200"]]
        code, rows, _ = run(capsys, "embed", "query", "-m", model, "--word", "alpha", "--position", 1)
        assert code == 0 and field(rows, "match")[0][:2] == ["1", "beta"]
        code, rows, _ = run(capsys, "embed", "query", "-m", model, "--word", "beta", "--position", -1)
        assert field(rows, "match")[0][1] == "alpha"
        code, rows, _ = run(capsys, "embed", "query", "-m", model, "--word", "alpha", "--similar", "alpha")
        assert field(rows, "similarity") == [["alpha", "alpha", "1.000000"]]

    def test_unknown_word(self, tmp_path, corpus, capsys):
        model = tmp_path / "m.hvm"
        run(capsys, "embed", "train", corpus, "-m", model)
        code, _, err = run(capsys, "embed", "query", "-m", model, "--word", "gamma")
        assert code == 5 and "gamma" in err

    def test_bad_position(self, tmp_path, corpus, capsys):
        model = tmp_path / "m.hvm"
        run(capsys, "embed", "train", corpus, "-m", model)
        assert run(capsys, "embed", "query", "-m", model, "--word", "alpha", "--position", 0)[0] == 2

    def test_missing_corpus(self, tmp_path, capsys):
        assert run(capsys, "embed", "train", tmp_path / "none.txt", "-m", tmp_path / "m.hvm")[0] == 3

    def test_resume_doubles_counts(self, tmp_path, corpus, capsys):
        model = tmp_path / "m.hvm"
        run(capsys, "embed", "train", corpus, "-m", model)
        _, rows, _ = run(capsys, "stats", model)
        assert field(rows, "feeds") == [["400"]]
        run(capsys, "embed", "train", corpus, "-m", model, "--resume")
        _, rows, _ = run(capsys, "stats", model)
        assert field(rows, "format") == [["HVM1"]]
        assert field(rows, "feeds") == [["800"]]
        assert ["alpha", "400"] in field(rows, "learner")

    def test_same_seed_identical(self, tmp_path, corpus, capsys):
        run(capsys, "embed", "train", corpus, "-m", tmp_path / "a.hvm", "--seed", 4)
        run(capsys, "embed", "train", corpus, "-m", tmp_path / "b.hvm", "--seed", 4)
        assert (tmp_path / "a.hvm").read_bytes() == (tmp_path / "b.hvm").read_bytes()


class TestStats:
    def test_unit_entry(self, tmp_path, book_path, capsys):
        run(capsys, "algebra", "power", "--book", book_path, "--inputs", "c0", "--exponent", 0, "--label", "I", "-o", tmp_path / "u.hvb")
        code, rows, _ = run(capsys, "stats", tmp_path / "u.hvb")
        assert code == 0
        assert field(rows, "format") == [["HVB1"]]
        assert field(rows, "entry") == [["I", "unit"]]
        assert field(rows, "overlap") == [["I", "256"]]

    def test_book_matrix(self, book_path, capsys):
        _, rows, _ = run(capsys, "stats", book_path)
        matrix = field(rows, "overlap")
        assert len(matrix) == 4 and matrix[2][3] == "256"

    def test_learner_file(self, tmp_path, capsys):
        space_rng = RngStream(2)
        space = SpaceConfig()
        book = Codebook(space)
        lrn = OnlineLearner()
        for i in range(3):
            c = random_code(space, space_rng)
            book.insert(f"p{i}", c)
            lrn.feed(c, space_rng)
        book.save(tmp_path / "b.hvb")
        lrn.save(tmp_path / "l.hvl")
        code, rows, _ = run(capsys, "stats", tmp_path / "l.hvl", "--book", tmp_path / "b.hvb")
        assert code == 0
        assert field(rows, "format") == [["HVL1"]] and field(rows, "count") == [["3"]]
        assert {m[1] for m in field(rows, "match")} == {"p0", "p1", "p2"}

    def test_garbage(self, tmp_path, capsys):
        (tmp_path / "g.bin").write_bytes(b"nothing here")
        assert run(capsys, "stats", tmp_path / "g.bin")[0] == 2
