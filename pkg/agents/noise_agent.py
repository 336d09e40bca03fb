"""
Projeto do ruído artificial: orçamento de impulsos, solução ótima da matriz
de seleção F, tradução de F* para a matriz de transição G e geração das
sequências ArN (artificial), RnF (aleatória completa) e RnP (aleatória parcial).
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from agents.compression_agent import SelectionSet
from utils.errors import DomainError

logger = logging.getLogger(__name__)

NOISE_SCHEMES = ("ArN", "RnF", "RnP")


@dataclass(frozen=True)
class NoiseSpec:
    """
    Parâmetros da fonte de ruído.

    Args:
        mu_a (float): Média da fonte
        sigma_a (float): Desvio padrão da fonte (> 0)
        rho (float): Ganho (> 0)
        E_A (float): Orçamento de energia por traço (>= 0)
    """

    mu_a: float = 0.0
    sigma_a: float = 1.0
    rho: float = 1.0
    E_A: float = 0.0

    def __post_init__(self):
        if not self.sigma_a > 0:
            raise DomainError(f"sigma_a deve ser > 0, recebeu {self.sigma_a}")
        if not self.rho > 0:
            raise DomainError(f"rho deve ser > 0, recebeu {self.rho}")
        if self.E_A < 0:
            raise DomainError(f"E_A deve ser >= 0, recebeu {self.E_A}")

    @property
    def second_moment(self):
        """E[n^2] = sigma_a^2 + mu_a^2 de uma amostra da fonte."""
        return self.sigma_a ** 2 + self.mu_a ** 2

    @property
    def impulse_energy(self):
        """Energia esperada de um impulso: rho^2 * E[n^2]."""
        return self.rho ** 2 * self.second_moment


@dataclass(frozen=True, eq=False)
class NoisePlan:
    """
    Plano de injeção: suporte F, orçamento A e esquema.

    Para RnP, F guarda uma realização do subconjunto aleatório (ou fica vazio
    quando o plano só descreve a contagem).
    """

    F: SelectionSet
    A: int
    scheme: str = "ArN"
    count: int = None

    def __post_init__(self):
        if self.scheme not in NOISE_SCHEMES:
            raise DomainError(f"Esquema de ruído desconhecido: {self.scheme}")
        if self.A < 0:
            raise DomainError("Orçamento A deve ser >= 0")
        if self.scheme == "RnF" and len(self.F) != self.F.m:
            raise DomainError("Um plano RnF cobre todas as amostras")
        if self.scheme in ("ArN", "RnP") and len(self.F) > self.A:
            raise DomainError(f"Rank(F)={len(self.F)} excede o orçamento A={self.A}")
        if self.count is None:
            object.__setattr__(self, "count", len(self.F))
        if self.count > self.F.m:
            raise DomainError(f"count={self.count} excede m={self.F.m}")

    @property
    def m(self):
        return self.F.m

    @property
    def rank(self):
        return len(self.F)

    @classmethod
    def rnf(cls, m):
        return cls(SelectionSet.full(m), A=m, scheme="RnF")

    def to_text(self):
        """Forma textual documentada: posições dos impulsos."""
        return "\n".join([
            f"scheme={self.scheme}",
            f"A={self.A}",
            f"count={self.count}",
            f"F={self.F}",
        ])


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """
    Matriz de transição esparsa do gerador determinístico.

    O estado s_i guarda o prefixo de F_d até o i-ésimo impulso; a única
    transição permitida de s_i é para s_{i+1}.
    """

    m: int
    states: tuple = ()
    entries: dict = field(default_factory=dict)

    @property
    def n(self):
        return len(self.states)

    @property
    def density(self):
        return len(self.entries) / (self.n ** 2) if self.n else 0.0

    def dense(self):
        G = np.zeros((self.n, self.n))
        for (i, j), value in self.entries.items():
            G[i, j] = value
        return G

    def impulse_positions(self):
        """Reconstrói Ω_F a partir dos estados (último índice de cada prefixo)."""
        return tuple(len(state) - 1 for state in self.states)

    def to_selection(self):
        return SelectionSet(self.m, self.impulse_positions())

    def to_text(self):
        """Forma textual documentada: lista de estados e pares de transição."""
        lines = [f"n={self.n}", f"m={self.m}"]
        for i, state in enumerate(self.states):
            lines.append(f"s{i}: len={len(state)} impulse@{len(state) - 1}")
        for (i, j) in sorted(self.entries):
            lines.append(f"s{i} -> s{j}")
        return "\n".join(lines)


def impulse_budget(spec, m):
    """
    Número máximo de impulsos dentro do orçamento de energia.

    A = floor(m * E_A / (rho^2 * Tr(E[N_a N_aᵀ]))) com Tr = m * E[n^2].

    Args:
        spec (NoiseSpec): Parâmetros da fonte
        m (int): Tamanho do traço

    Returns:
        int: Orçamento A
    """
    if spec.E_A == 0:
        return 0
    budget = (m * spec.E_A) / (spec.rho ** 2 * m * spec.second_moment)
    # tolerância para não perder um impulso por arredondamento binário
    return int(math.floor(budget + 1e-9))


def solve_F(omega_P, A, rng):
    """
    Solução ótima da matriz de seleção F.

    Se |Ω_P̂| <= A, F* = P̂; caso contrário um subconjunto uniforme de
    tamanho A de Ω_P̂, sorteado uma vez e congelado.

    Args:
        omega_P (SelectionSet): Seleção do projetista
        A (int): Orçamento de impulsos
        rng (np.random.Generator): Fonte semeada

    Returns:
        SelectionSet: Ω_F
    """
    if A < 0:
        raise DomainError("Orçamento A deve ser >= 0")
    if len(omega_P) <= A:
        return omega_P
    chosen = rng.choice(omega_P.array, size=A, replace=False)
    return SelectionSet(omega_P.m, tuple(sorted(int(i) for i in chosen)))


def objective(F, omega_P, spec):
    """
    Energia de ruído que chega ao atacante: |Ω_F ∩ Ω_P̂| * rho^2 * E[n^2].

    Args:
        F (SelectionSet): Suporte dos impulsos
        omega_P (SelectionSet): Seleção de compressão
        spec (NoiseSpec): Parâmetros da fonte

    Returns:
        float: rho^2 * Tr(E[Δ N_a N_aᵀ]) com Δ = FᵀP̂F
    """
    return len(F.intersection(omega_P)) * spec.impulse_energy


def f_to_transition(F):
    """
    Traduz F* para a matriz de transição G.

    Percorre a diagonal de F; cada impulso cria o estado com o prefixo de
    F_d até ele, encadeado deterministicamente ao próximo.

    Args:
        F (SelectionSet): Suporte dos impulsos

    Returns:
        TransitionMatrix: Cadeia de n = |Ω_F| estados
    """
    diagonal = np.zeros(F.m, dtype=np.int8)
    diagonal[list(F.indices)] = 1
    states = tuple(tuple(diagonal[:i + 1].tolist()) for i in F.indices)
    entries = {(i, i + 1): 1 for i in range(len(states) - 1)}
    return TransitionMatrix(F.m, states, entries)


def _check_scheme(plan, scheme):
    if plan.scheme != scheme:
        raise DomainError(f"Plano {plan.scheme} usado como {scheme}")


def gen_arn(plan, spec, rng, n=None):
    """
    Ruído artificial ρ·F·N_a: zero fora de Ω_F.

    Args:
        plan (NoisePlan): Plano ArN
        spec (NoiseSpec): Parâmetros da fonte
        rng (np.random.Generator): Fonte semeada
        n (int, opcional): Número de traços (lote); None gera um único vetor

    Returns:
        np.ndarray: (m,) ou (n, m)
    """
    _check_scheme(plan, "ArN")
    shape = (plan.m,) if n is None else (n, plan.m)
    noise = np.zeros(shape)
    if plan.rank:
        idx = list(plan.F.indices)
        noise[..., idx] = spec.rho * rng.normal(spec.mu_a, spec.sigma_a, size=shape[:-1] + (len(idx),))
    return noise


def gen_rnf(m, spec, rng, n=None):
    """
    Ruído aleatório em todas as amostras, escalado por rho.

    Args:
        m (int): Tamanho do traço
        spec (NoiseSpec): Parâmetros da fonte
        rng (np.random.Generator): Fonte semeada
        n (int, opcional): Número de traços

    Returns:
        np.ndarray: (m,) ou (n, m)
    """
    shape = (m,) if n is None else (n, m)
    return spec.rho * rng.normal(spec.mu_a, spec.sigma_a, size=shape)


def gen_rnp(m, count, spec, rng, n=None):
    """
    Ruído em um subconjunto aleatório de `count` amostras, resorteado por traço.

    Args:
        m (int): Tamanho do traço
        count (int): Número de amostras ruidosas (|Ω_F| do plano ArN pareado)
        spec (NoiseSpec): Parâmetros da fonte
        rng (np.random.Generator): Fonte semeada
        n (int, opcional): Número de traços

    Returns:
        np.ndarray: (m,) ou (n, m)
    """
    if count > m:
        raise DomainError(f"count={count} excede m={m}")
    rows = 1 if n is None else n
    noise = np.zeros((rows, m))
    if count:
        support = np.argsort(rng.random((rows, m)), axis=1)[:, :count]
        values = spec.rho * rng.normal(spec.mu_a, spec.sigma_a, size=(rows, count))
        np.put_along_axis(noise, support, values, axis=1)
    return noise[0] if n is None else noise


class NoiseDesignAgent:
    """
    Agente do projetista: transforma a seleção Ω_P̂ e a especificação de
    ruído em um plano congelado e gera as sequências de cada esquema.
    """

    def __init__(self, spec, A=None):
        self.spec = spec
        self.A = A

    def budget(self, m):
        return self.A if self.A is not None else impulse_budget(self.spec, m)

    def design(self, omega_P, rng):
        """
        Constrói o plano ArN ótimo e a matriz de transição correspondente.

        Args:
            omega_P (SelectionSet): Seleção do projetista
            rng (np.random.Generator): Fonte semeada (usada só no caso |Ω_P̂| > A)

        Returns:
            tuple: (NoisePlan, TransitionMatrix)
        """
        A = self.budget(omega_P.m)
        F = solve_F(omega_P, A, rng)
        plan = NoisePlan(F, A, "ArN")
        logger.info("Plano ArN: A=%d, |Ω_P̂|=%d, |Ω_F|=%d", A, len(omega_P), plan.rank)
        return plan, f_to_transition(F)

    def matched_rnp(self, arn_plan):
        """Plano RnP com o mesmo número |Ω_F| de amostras ruidosas."""
        return NoisePlan(SelectionSet(arn_plan.m), A=arn_plan.A, scheme="RnP", count=arn_plan.rank)

    def draw_rnp_plan(self, m, count, A, rng):
        """Uma realização do suporte RnP como plano (para análise de capacidade)."""
        support = rng.choice(m, size=count, replace=False)
        return NoisePlan(SelectionSet(m, tuple(int(i) for i in support)), A=A, scheme="RnP", count=count)

    def generate(self, plan, rng, n=None, spec=None):
        """
        Gera ruído do esquema do plano (None = OA, sem ruído).

        Returns:
            np.ndarray: (m,) ou (n, m)
        """
        spec = spec or self.spec
        if plan.scheme == "ArN":
            return gen_arn(plan, spec, rng, n)
        if plan.scheme == "RnF":
            return gen_rnf(plan.m, spec, rng, n)
        return gen_rnp(plan.m, plan.count, spec, rng, n)
