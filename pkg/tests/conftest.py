import numpy as np
import pytest

from agents.leakage_agent import DeviceNoise, LeakageAgent, make_synthetic_model
from data.traces import TraceSet
from utils.config import ExperimentConfig


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_leakage():
    """Dispositivo B=4, m=20, uma amostra informativa por janela de 5."""
    model = make_synthetic_model(20, 4, [2, 7, 12, 17], np.random.default_rng(7))
    return LeakageAgent(model, DeviceNoise(0.0, 0.5))


@pytest.fixture
def noiseless_leakage():
    model = make_synthetic_model(20, 4, [2, 7, 12, 17], np.random.default_rng(7))
    return LeakageAgent(model, DeviceNoise(0.0, 1e-9))


@pytest.fixture
def small_profiling(small_leakage, rng):
    return small_leakage.generate(range(16), 40, rng)


@pytest.fixture
def hand_trace_set():
    # B=2, 4 chaves, 2 traços de 3 amostras cada
    traces = {
        0: [[0.0, 1.0, 2.0], [0.2, 1.0, 2.2]],
        1: [[1.0, 1.0, 2.0], [1.2, 1.0, 1.8]],
        2: [[0.0, 3.0, 2.0], [0.0, 3.2, 2.0]],
        3: [[1.0, 3.0, 2.0], [1.0, 2.8, 2.0]],
    }
    return TraceSet(3, 2, traces)


@pytest.fixture
def small_config(tmp_path):
    """Configuração de bancada reduzida (B=4, m=40) para rodar em segundos."""
    return ExperimentConfig(
        B=4, m=40, informative=4, clock_len=10, sigma_n=0.5,
        s_d="1ppc", s_a="1ppc", I_p=20, I_a=3, n_tests=4, design_trace_count=20,
        n_keys=4, seed=11, out_dir=str(tmp_path / "out"), progress=False, rnp_draws=10,
    )
