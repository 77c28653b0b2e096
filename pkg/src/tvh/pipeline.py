"""Composition of the stages into the twofold hashing system: frame hashes
drive synchronization, the synchronized query is flow-hashed, and the two
distances are optionally fused."""
from __future__ import annotations

from dataclasses import dataclass

from .config import PipelineConfig
from .distance_boost import BoostModel, d_fh
from .dtw_sync import SyncResult, sync_distance, sync_video
from .flow_hash import flow_hash_or_sentinel
from .frame_hash import extract_frame_hashes
from .store import HashRecord, check_fingerprint


def hash_video(v, cfg: PipelineConfig | None = None, source_id=None) -> HashRecord:
    cfg = cfg or PipelineConfig()
    return HashRecord(
        source_id if source_id is not None else v.source_id,
        extract_frame_hashes(v),
        flow_hash_or_sentinel(v, cfg.flow),
        cfg.fingerprint(),
    )


@dataclass
class Comparison:
    d_dtw: float
    d_fh: float
    d_boost: float | None = None
    tau: float | None = None
    sync: SyncResult | None = None

    @property
    def decision(self):
        """"match" when the deciding distance falls below tau."""
        if self.tau is None:
            return None
        d = self.d_boost if self.d_boost is not None else self.d_fh
        return "match" if d < self.tau else "nonmatch"

    def lines(self):
        out = [f"d_dtw={self.d_dtw!r}", f"d_fh={self.d_fh!r}"]
        if self.d_boost is not None:
            out.append(f"d_boost={self.d_boost!r}")
        if self.tau is not None:
            out += [f"tau={self.tau!r}", f"decision={self.decision}"]
        return out


def compare(ref, query, cfg: PipelineConfig | None = None, model: BoostModel | None = None,
            tau=None, sync=True) -> Comparison:
    """Score ``query`` (a video) against ``ref`` (a video or a stored record)."""
    cfg = cfg or PipelineConfig()
    if isinstance(ref, HashRecord):
        check_fingerprint(ref, cfg.fingerprint())
        rec = ref
    else:
        rec = hash_video(ref, cfg)
    hq = extract_frame_hashes(query)
    result = None
    if sync:
        result = sync_video(query, hq, rec.frame_hashes, cfg.dtw_band)
        dd = result.d_dtw
        target = result.video
    else:
        dd = sync_distance(hq, rec.frame_hashes, cfg.dtw_band)
        target = query
    df = d_fh(rec.flow_hash, flow_hash_or_sentinel(target, cfg.flow))
    db = None if model is None else model.alpha1 * dd + model.alpha2 * df
    return Comparison(dd, df, db, tau, result)
