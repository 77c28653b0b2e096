"""Exception hierarchy shared by all pipeline stages.

Each error carries an ``exit_code`` so the CLI can map failures onto its
contract: 2 usage, 3 data, 4 compute.
"""


class TvhError(Exception):
    exit_code = 3


class DataError(TvhError):
    exit_code = 3


class ComputeError(TvhError):
    exit_code = 4


# video_io
class UnsupportedFormat(DataError):
    pass


class CorruptStream(DataError):
    pass


class EmptyVideo(DataError):
    pass


class IoFailure(DataError):
    pass


# frame_hash / dtw_sync
class DegenerateFrame(DataError):
    pass


class EmptySeries(DataError):
    pass


class EmptyMatchTable(ComputeError):
    pass


# flow_hash
class VideoTooShort(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class AllZeroFlow(ComputeError):
    """Flow vanished everywhere, so the hash cannot be L2-normalized."""


# distance_boost
class LengthMismatch(DataError):
    pass


class EmptyTripletSet(DataError):
    pass


class DegenerateTripletWarning(UserWarning):
    pass


# attacks
class TooShortAfterDrop(DataError):
    pass


# eval
class MissingLabelClass(DataError):
    pass


class CorpusTooSmall(DataError):
    pass


# store
class NotFound(DataError):
    pass


class FingerprintMismatch(DataError):
    pass


class CorruptStore(DataError):
    pass
