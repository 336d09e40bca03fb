"""
Métricas de avaliação: taxa de recuperação (SRR), eficiência energética
por ataque (EE) e sua média sobre chaves e testes (EE_avg).
"""
import math
from dataclasses import dataclass, field

import numpy as np

from utils.errors import DomainError


@dataclass(frozen=True)
class EnergyNormalizer:
    """Normalização N_T · m · σ² da energia de ruído."""

    n_tests: int
    m: int
    sigma2: float

    def __post_init__(self):
        if self.n_tests < 1 or self.m < 1 or not self.sigma2 > 0:
            raise DomainError("Normalizador exige N_T >= 1, m >= 1 e σ² > 0")

    @property
    def scale(self):
        return self.n_tests * self.m * self.sigma2


def ee(success, noise_energy, normalizer):
    """
    Eficiência energética de um ataque: (1 - sucesso) / energia normalizada.

    Args:
        success (bool): Se o atacante recuperou a chave
        noise_energy (float): Energia de ruído gasta nos I_a traços
        normalizer (EnergyNormalizer): Parâmetros (N_T, m, σ²)

    Returns:
        float: EE (0 em caso de sucesso, NaN quando não se aplica, ex: OA)
    """
    if success:
        return 0.0
    if noise_energy <= 0:
        return math.nan
    return 1.0 / (noise_energy / normalizer.scale)


@dataclass
class ExperimentStats:
    """
    Acumulador de resultados por chave para um esquema em um ponto de varredura.
    """

    n_keys: int
    n_tests: int
    hits: dict = field(default_factory=dict)
    ee_values: dict = field(default_factory=dict)
    energies: list = field(default_factory=list)

    def record(self, outcome, normalizer=None):
        """Registra um AttackOutcome (com EE quando há normalizador)."""
        key = outcome.true_key
        self.hits[key] = self.hits.get(key, 0) + int(outcome.success)
        self.energies.append(outcome.noise_energy_spent)
        if normalizer is not None:
            value = ee(outcome.success, outcome.noise_energy_spent, normalizer)
            self.ee_values.setdefault(key, []).append(value)

    def merge(self, other):
        """Agrupa testes de outro acumulador (ex: OA/RnF entre pontos de A)."""
        merged = ExperimentStats(self.n_keys, self.n_tests + other.n_tests)
        for source in (self, other):
            for key, count in source.hits.items():
                merged.hits[key] = merged.hits.get(key, 0) + count
            for key, values in source.ee_values.items():
                merged.ee_values.setdefault(key, []).extend(values)
            merged.energies.extend(source.energies)
        return merged

    @property
    def per_key_success(self):
        return dict(self.hits)

    @property
    def srr(self):
        return srr(self.hits, self.n_tests, self.n_keys)

    @property
    def ee_avg(self):
        if not self.ee_values:
            return math.nan
        return ee_avg(self.ee_values)

    @property
    def total_noise_energy(self):
        return float(np.sum(self.energies))

    @property
    def n_trials(self):
        return len(self.energies)


def srr(hits, n_tests, n_keys=None):
    """
    Taxa de recuperação: média sobre as chaves de N_hit(k) / N_T.

    Args:
        hits (dict): chave -> número de acertos
        n_tests (int): N_T
        n_keys (int, opcional): Número de chaves esperado

    Returns:
        float: SRR em [0, 1]
    """
    if n_keys is not None and len(hits) != n_keys:
        raise DomainError(f"Resultados para {len(hits)} chaves, esperado {n_keys}")
    if not hits:
        raise DomainError("Nenhum resultado para calcular a SRR")
    if n_tests < 1:
        raise DomainError("N_T deve ser >= 1")
    return float(np.mean([h / n_tests for h in hits.values()]))


def ee_avg(ee_values):
    """
    Média dupla de EE: interna sobre os N_T testes, externa sobre as chaves.

    Args:
        ee_values (dict): chave -> lista de EE por teste

    Returns:
        float: EE_avg (NaN se algum teste não tiver EE definido)
    """
    if not ee_values:
        raise DomainError("Nenhum resultado para calcular EE_avg")
    per_key = [np.mean(values) for values in ee_values.values()]
    return float(np.mean(per_key))
