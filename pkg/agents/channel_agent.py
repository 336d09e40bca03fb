"""
Análise do canal lateral: SNR e capacidade para vazamento bruto, com ruído
aleatório e com ruído artificial sobre amostras comprimidas.
"""
import logging
from dataclasses import asdict, dataclass

import numpy as np

from agents.compression_agent import compress
from agents.noise_agent import NoiseDesignAgent, objective
from utils.errors import DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CapacityReport:
    """Energias, SNR e capacidade C_s = ½·log(1 + SNR) de um canal."""

    signal_energy: float
    device_noise_energy: float
    injected_noise_energy: float
    snr: float
    capacity_bits: float

    def as_row(self):
        return asdict(self)


def _capacity(snr, base):
    return 0.5 * np.log1p(snr) / np.log(base)


def _report(signal_energy, device, injected, base=2.0):
    if min(signal_energy, device, injected) < 0:
        raise DomainError("Energias do canal devem ser não negativas")
    total_noise = device + injected
    if total_noise == 0:
        raise DomainError("Energia total de ruído nula: SNR indefinida")
    snr = signal_energy / total_noise
    return CapacityReport(
        signal_energy=float(signal_energy),
        device_noise_energy=float(device),
        injected_noise_energy=float(injected),
        snr=float(snr),
        capacity_bits=float(_capacity(snr, base)),
    )


def _signal_energy(signal):
    signal = np.asarray(signal, dtype=float)
    if signal.ndim == 2:
        # várias chaves: média de |Y(X)|^2 sobre as chaves
        return float(np.mean(np.sum(signal ** 2, axis=1)))
    return float(signal @ signal)


def raw_capacity(signal, device_noise, base=2.0):
    """
    Capacidade do canal bruto: SNR = |Y|^2 / (m * (sigma_N^2 + mu_N^2)).

    Args:
        signal (np.ndarray): Y(X) (m,) ou sinais de várias chaves (K, m)
        device_noise (DeviceNoise): Ruído do dispositivo
        base (float): Base do logaritmo (2 = bits)

    Returns:
        CapacityReport: Relatório do canal
    """
    signal = np.asarray(signal, dtype=float)
    m = signal.shape[-1]
    if m == 0:
        raise DomainError("Sinal sem amostras")
    return _report(_signal_energy(signal), m * device_noise.second_moment, 0.0, base)


def noised_capacity(signal, device_noise, extra_energy, base=2.0):
    """
    Capacidade com ruído aleatório: E[|N_r|^2] somado ao denominador.

    Args:
        signal (np.ndarray): Y(X)
        device_noise (DeviceNoise): Ruído do dispositivo
        extra_energy (float): Energia do ruído injetado (>= 0)

    Returns:
        CapacityReport: Relatório do canal
    """
    if extra_energy < 0:
        raise DomainError("extra_energy deve ser >= 0")
    signal = np.asarray(signal, dtype=float)
    m = signal.shape[-1]
    return _report(_signal_energy(signal), m * device_noise.second_moment, extra_energy, base)


def injected_energy(sel, plan, spec, expected=True):
    """
    Energia do ruído injetado que sobrevive à compressão.

    ArN/RnF: forma fechada |Ω_F ∩ Ω_P̂|·rho^2·E[n^2]. RnP com `expected`:
    valor esperado count·|Ω_P̂|/m·rho^2·E[n^2] (média hipergeométrica);
    sem `expected`, usa a realização guardada em plan.F.
    """
    if plan is None:
        return 0.0
    if plan.m != sel.m:
        raise DomainError(f"Plano sobre m={plan.m} e seleção sobre m={sel.m}")
    if plan.scheme == "RnP" and expected:
        return plan.count * len(sel) / sel.m * spec.impulse_energy
    return objective(plan.F, sel, spec)


def compressed_capacity(signal, sel, plan, spec, device_noise, base=2.0, expected=True):
    """
    Capacidade do canal comprimido e ruidoso.

    Args:
        signal (np.ndarray): Y(X) (m,) ou (K, m)
        sel (SelectionSet): Seleção do atacante
        plan (NoisePlan | None): Plano de ruído (None = sem ruído)
        spec (NoiseSpec): Parâmetros da fonte
        device_noise (DeviceNoise): Ruído do dispositivo

    Returns:
        CapacityReport: Relatório do canal
    """
    signal = np.asarray(signal, dtype=float)
    if signal.shape[-1] != sel.m:
        raise DomainError(f"Sinal de tamanho {signal.shape[-1]} para seleção sobre m={sel.m}")
    compressed = compress(signal, sel)
    device = len(sel) * device_noise.second_moment
    return _report(_signal_energy(compressed), device, injected_energy(sel, plan, spec, expected), base)


def rnp_capacity_draws(signal, sel, count, A, spec, device_noise, rng, draws=100, base=2.0):
    """
    Capacidades de realizações independentes do suporte RnP.

    Returns:
        np.ndarray: Capacidade (bits) de cada sorteio
    """
    agent = NoiseDesignAgent(spec, A)
    capacities = np.empty(draws)
    for d in range(draws):
        plan = agent.draw_rnp_plan(sel.m, count, A, rng)
        capacities[d] = compressed_capacity(signal, sel, plan, spec, device_noise, base, expected=False).capacity_bits
    return capacities


def plugin_capacity(traces, signal, base=2.0):
    """
    Estimativa plug-in de um canal gaussiano a partir de traços amostrados.

    Args:
        traces (np.ndarray): Traços (n, m) gerados com o sinal `signal`
        signal (np.ndarray): Y(X) (m,)

    Returns:
        float: ½·log(1 + |Y|^2 / média |L - Y|^2)
    """
    traces = np.atleast_2d(np.asarray(traces, dtype=float))
    signal = np.asarray(signal, dtype=float)
    noise_energy = np.mean(np.sum((traces - signal) ** 2, axis=1))
    if noise_energy <= 0:
        raise DomainError("Traços sem ruído: estimativa plug-in indefinida")
    return float(_capacity(signal @ signal / noise_energy, base))


class ChannelAgent:
    """
    Agente de avaliação em tempo de projeto: capacidade de cada esquema
    sobre a seleção do atacante, com sinal médio sobre as chaves.
    """

    def __init__(self, signals, device_noise, base=2.0):
        self.signals = np.atleast_2d(np.asarray(signals, dtype=float))
        self.device_noise = device_noise
        self.base = base

    def report(self, sel, plan, spec):
        return compressed_capacity(self.signals, sel, plan, spec, self.device_noise, self.base)
