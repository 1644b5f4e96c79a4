import numpy as np
import pytest
from sklearn.datasets import load_digits

from spikegrad.data import save_idx


@pytest.fixture(scope="session")
def digits_idx(tmp_path_factory):
    """The bundled 8x8 digits dataset written through the IDX format.

    Stands in for MNIST-class data: real images, 10 classes, exercised via
    the same parser a full-size IDX pair would use.
    """
    root = tmp_path_factory.mktemp("digits")
    d = load_digits()
    images = np.round(d.images / 16.0 * 255).astype(np.uint8)
    labels = d.target.astype(np.uint8)
    order = np.random.default_rng(0).permutation(len(labels))
    n_test = 360
    test_idx, train_idx = order[:n_test], order[n_test:]
    paths = {
        "train_images": root / "train-images.idx",
        "train_labels": root / "train-labels.idx",
        "test_images": root / "test-images.idx",
        "test_labels": root / "test-labels.idx",
    }
    save_idx(images[train_idx], labels[train_idx],
             paths["train_images"], paths["train_labels"])
    save_idx(images[test_idx], labels[test_idx],
             paths["test_images"], paths["test_labels"])
    return {k: str(v) for k, v in paths.items()}


@pytest.fixture(scope="session")
def digits_config(digits_idx):
    """Desk-scale training config on the digits IDX pair."""
    return {
        "network.layer_sizes": "64,300,10",
        "network.timesteps": 4,
        "surrogate.family": "arctan",
        "surrogate.alpha": 2.0,
        "optim.kind": "adamw",
        "optim.lr": 0.05,
        "schedule.epochs": 5,
        "batch_size": 128,
        "seed": 0,
        "data.source": "idx",
        "data.train_images": digits_idx["train_images"],
        "data.train_labels": digits_idx["train_labels"],
        "data.test_images": digits_idx["test_images"],
        "data.test_labels": digits_idx["test_labels"],
    }
