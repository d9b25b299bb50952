from .nets import FeedforwardNet, GRUNet, DimensionMismatch
from .normalize import Normalizer, ConstantFeature
from .training import TrainConfig, TrainHistory, Divergence, train, grad_check, loss_and_grads, mse_of
from .serialize import net_to_json, net_from_json, save_payload, load_payload

__all__ = [
    "FeedforwardNet", "GRUNet", "DimensionMismatch",
    "Normalizer", "ConstantFeature",
    "TrainConfig", "TrainHistory", "Divergence", "train", "grad_check",
    "loss_and_grads", "mse_of",
    "net_to_json", "net_from_json", "save_payload", "load_payload",
]
