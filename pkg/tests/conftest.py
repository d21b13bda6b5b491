import time

import numpy as np
import pytest

from gpenhance.joint import JointConfig
from gpenhance.pipeline import load_features, train_from_manifest
from gpenhance.synthetic import SyntheticDatasetConfig, gen_synthetic_dataset

# filled by test_acceptance.py, printed after the run
ACCEPTANCE = {}


def record_criterion(number, title, passed, detail=""):
    ACCEPTANCE[number] = (title, bool(passed), detail)
    line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {title}"
    print(line + (f"  [{detail}]" if detail else ""))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, passed, detail = ACCEPTANCE[number]
        line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {title}"
        terminalreporter.write_line(line + (f"  [{detail}]" if detail else ""))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def toy_data(tmp_path_factory):
    """Small seeded synthetic train/test split shared by the unit tests."""
    root = tmp_path_factory.mktemp("toy")
    train, train_path = gen_synthetic_dataset(
        SyntheticDatasetConfig(n_images=12, image_size=32, p=2, seed=101), root / "train")
    # 50 held-out triples: one seeded trial each
    test, test_path = gen_synthetic_dataset(
        SyntheticDatasetConfig(n_images=50, image_size=32, p=2, seed=202), root / "test")
    return {"train": train, "train_path": train_path, "test": test, "test_path": test_path,
            "train_features": load_features(train), "test_features": load_features(test)}


@pytest.fixture(scope="session")
def toy_model(toy_data):
    return train_from_manifest(toy_data["train"], JointConfig(),
                               features=toy_data["train_features"])


@pytest.fixture(scope="session")
def acceptance_run(tmp_path_factory):
    """40 train / 20 test seeded synthetic triples under the default training config."""
    root = tmp_path_factory.mktemp("accept")
    train, train_path = gen_synthetic_dataset(
        SyntheticDatasetConfig(n_images=40, image_size=48, p=2, seed=1), root / "train")
    test, test_path = gen_synthetic_dataset(
        SyntheticDatasetConfig(n_images=20, image_size=48, p=2, seed=2), root / "test")
    train_features = load_features(train)
    t0 = time.perf_counter()
    model = train_from_manifest(train, JointConfig(), features=train_features)
    return {"root": root, "train": train, "train_path": train_path, "test": test,
            "test_path": test_path, "train_features": train_features,
            "test_features": load_features(test), "model": model,
            "train_seconds": time.perf_counter() - t0}
