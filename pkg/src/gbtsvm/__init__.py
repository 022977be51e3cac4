"""Point-source recognition in X-ray photon event data.

Peak detection on Poisson count images, spatial and spectral region
features, and a granular binary-tree SVM classifier, plus a synthetic
observation simulator for ground-truth testing.
"""

from .detect import DetectionConfig, PeakCandidate, detect_peaks, estimate_lambda
from .events import EnergyBand, EventTable, bin_image, load_events
from .features import FeatureVector
from .gbt import ClassCode, GBTModel, SourceClass, classify, load_model, save_model, train_gbt
from .svm import TrainConfig

__version__ = "0.1.0"

__all__ = [
    "ClassCode", "DetectionConfig", "EnergyBand", "EventTable", "FeatureVector", "GBTModel",
    "PeakCandidate", "SourceClass", "TrainConfig", "bin_image", "classify", "detect_peaks",
    "estimate_lambda", "load_events", "load_model", "save_model", "train_gbt",
]
