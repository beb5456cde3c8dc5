"""Vector symbolic computing over segmented sparse binary hypervectors."""

from .algebra import bind, bundle, bundle_uniform, inverse, power, release, unit
from .cleanup import Codebook, Match
from .core import (
    DEFAULT_SPACE,
    Hypervector,
    RngStream,
    SpaceConfig,
    SpaceMismatchError,
    cosine,
    hamming,
    overlap,
    random_code,
)
from .embedding import (
    TokenStream,
    UnknownWordError,
    VocabularyModel,
    observe,
    query_context,
    tokenize,
    train_stream,
    word_similarity,
)
from .learner import (
    FrameProjection,
    NearlyOrthogonalSet,
    OnlineLearner,
    feed,
    frame_inner_product,
    project,
)
from .structures import (
    CorrelatedMembersWarning,
    SequenceCodec,
    decode_sequence,
    decode_set,
    default_threshold,
    encode_sequence,
    encode_set,
)

__version__ = "0.1.0"
