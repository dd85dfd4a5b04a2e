from .flow import FlowConfig, optical_flow, FLOW_PROVIDERS
from .hvs import HvsParams, fechner_transform
from .histograms import Histogram, bhattacharyya, flux, h2d, hoof, tracklet_histogram
from .tracking import Tracklet, TrackerParams, track
from .compare import FeatureBundle, compare_videos, pearson, video_features

__all__ = [
    "FlowConfig", "optical_flow", "FLOW_PROVIDERS",
    "HvsParams", "fechner_transform",
    "Histogram", "bhattacharyya", "flux", "h2d", "hoof", "tracklet_histogram",
    "Tracklet", "TrackerParams", "track",
    "FeatureBundle", "compare_videos", "pearson", "video_features",
]
