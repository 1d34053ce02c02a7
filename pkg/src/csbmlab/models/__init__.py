"""Graph classifiers: fixed-weight GCNs, trainable GCN/MLP, spectral clustering."""

from .estimators import (EdgeRewirer, FeatureResampler, GCNClassifier, MLPClassifier,
                         OneLayerGCN, SpectralClusterer, TwoLayerLinearGCN)
from .linear import (CostTrial, TwoLayerGcn, cost_inequality_trial, gcn_forward, linearize,
                     logistic_cost, one_layer_predict, project_linear, reflect_features,
                     two_layer_linear_predict)
from .nn import TrainConfig, TrainingDivergedError, TrainResult, train_gcn, train_mlp
from .spectral import aligned_accuracy, spectral_cluster

__all__ = [
    "EdgeRewirer", "FeatureResampler", "GCNClassifier", "MLPClassifier", "OneLayerGCN",
    "SpectralClusterer", "TwoLayerLinearGCN", "CostTrial", "TwoLayerGcn",
    "cost_inequality_trial", "gcn_forward", "linearize", "logistic_cost", "one_layer_predict",
    "project_linear", "reflect_features", "two_layer_linear_predict", "TrainConfig",
    "TrainingDivergedError", "TrainResult", "train_gcn", "train_mlp", "aligned_accuracy",
    "spectral_cluster",
]
