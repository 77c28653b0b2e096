"""Twofold video hashing: DTW-based resynchronization of query videos,
optical-flow hashes, and trained fusion of the two distances."""

from .attacks import AttackSpec, AttackedVideo
from .config import PipelineConfig
from .distance_boost import BoostModel, DistancePair, d_boost, d_fh, train
from .dtw_sync import MatchTable, WarpingPath, cost_matrix, dtw, matching_intervals, sync_distance, synchronize
from .flow_hash import FlowHash, FlowHashConfig, flow_hash
from .frame_hash import FrameHashSeries, dct2, extract_frame_hashes
from .pipeline import compare, hash_video
from .video_io import IngestConfig, VideoTensor, ingest, write_raw

__version__ = "0.1.0"
