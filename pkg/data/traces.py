"""
Registros do domínio: segredos, traços de vazamento e conjuntos de traços.

Todos os objetos são imutáveis depois de construídos (os arrays internos
são marcados como somente leitura) e podem ser compartilhados entre threads.
"""
from dataclasses import dataclass, field

import numpy as np

from utils.errors import DomainError

ROLES = ("profiling", "attack", "design", "raw")


def hamming_weight(x):
    """
    Conta os bits "1" de um inteiro sem sinal.

    Args:
        x (int): Valor não negativo

    Returns:
        int: Peso de Hamming de x
    """
    if x < 0:
        raise DomainError(f"hamming_weight espera inteiro sem sinal, recebeu {x}")
    return bin(int(x)).count("1")


def binary_expand(x, B):
    """
    Expande um segredo no vetor binário F_b(X) de tamanho B+1.

    O elemento 0 é sempre 1 (termo constante); o elemento b (1 <= b <= B)
    é o bit b-1 de x.

    Args:
        x (int): Segredo em [0, 2^B - 1]
        B (int): Largura em bits

    Returns:
        np.ndarray: Vetor float de tamanho B+1
    """
    if B < 1:
        raise DomainError(f"Largura B deve ser >= 1, recebeu {B}")
    if not 0 <= int(x) < (1 << B):
        raise DomainError(f"Segredo {x} fora da faixa [0, 2^{B} - 1]")
    bits = np.ones(B + 1)
    bits[1:] = (int(x) >> np.arange(B)) & 1
    return bits


def expansion_matrix(keys, B):
    """Empilha F_b(k) para cada chave (uma linha por chave)."""
    return np.vstack([binary_expand(k, B) for k in keys])


@dataclass(frozen=True)
class Secret:
    """Segredo de B bits e sua expansão binária (bits[0] = 1)."""

    value: int
    B: int = 8
    bits: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        bits = binary_expand(self.value, self.B)
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    @property
    def hamming_weight(self):
        return hamming_weight(self.value)


@dataclass(frozen=True, eq=False)
class LeakageTrace:
    """Um traço de vazamento de tamanho m gravado sob um segredo."""

    samples: np.ndarray
    key: Secret

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float)
        if samples.ndim != 1:
            raise DomainError("Um traço deve ser um vetor unidimensional")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def m(self):
        return self.samples.shape[0]


@dataclass(frozen=True, eq=False)
class TraceSet:
    """
    Conjunto de traços agrupados por valor de chave.

    Args:
        m (int): Tamanho de cada traço
        B (int): Largura do segredo em bits
        traces (dict): chave -> array (n_k, m)
        role (str): "profiling", "attack", "design" ou "raw"
    """

    m: int
    B: int
    traces: dict
    role: str = "profiling"

    def __post_init__(self):
        if self.role not in ROLES:
            raise DomainError(f"Papel de conjunto desconhecido: {self.role}")
        frozen = {}
        for key in sorted(self.traces):
            if not 0 <= int(key) < (1 << self.B):
                raise DomainError(f"Chave {key} fora da faixa para B={self.B}")
            block = self.traces[key]
            # blocos mapeados em disco (int16) ficam no arquivo até serem sorteados
            if not isinstance(block, np.memmap):
                block = np.array(block, dtype=float)
            if block.ndim == 1:
                block = block[np.newaxis, :]
            if block.ndim != 2 or block.shape[1] != self.m:
                raise DomainError(
                    f"Traços da chave {key} têm forma {block.shape}, esperado (n, {self.m})"
                )
            block.setflags(write=False)
            frozen[int(key)] = block
        object.__setattr__(self, "traces", frozen)

    @classmethod
    def from_arrays(cls, samples, labels, B, role="profiling"):
        """
        Agrupa uma matriz de traços (n, m) e um vetor de rótulos em um TraceSet.

        Args:
            samples (np.ndarray): Traços empilhados
            labels (np.ndarray): Chave de cada linha
            B (int): Largura do segredo
            role (str): Papel do conjunto

        Returns:
            TraceSet: Conjunto agrupado
        """
        samples = np.asarray(samples, dtype=float)
        labels = np.asarray(labels, dtype=int)
        if samples.ndim != 2 or samples.shape[0] != labels.shape[0]:
            raise DomainError("Número de traços e de rótulos não confere")
        traces = {int(k): samples[labels == k] for k in np.unique(labels)}
        return cls(m=samples.shape[1], B=B, traces=traces, role=role)

    @property
    def keys(self):
        return list(self.traces)

    @property
    def counts(self):
        return {k: v.shape[0] for k, v in self.traces.items()}

    @property
    def n_traces(self):
        return sum(self.counts.values())

    @property
    def is_complete(self):
        return len(self.traces) == (1 << self.B)

    def get(self, key):
        if key not in self.traces:
            raise DomainError(f"Chave {key} ausente do conjunto ({self.role})")
        return self.traces[key]

    def take(self, key, rows):
        """
        Copia as linhas escolhidas de uma chave como float.

        Args:
            key (int): Chave
            rows (slice | np.ndarray): Linhas a copiar

        Returns:
            np.ndarray: Traços (n, m) em float
        """
        return np.asarray(self.get(key)[rows], dtype=float)

    def mean_traces(self):
        """
        Calcula o traço médio de cada chave.

        Returns:
            tuple: (array de chaves (K,), médias (K, m))
        """
        keys = np.array(self.keys, dtype=int)
        means = np.vstack([self.traces[k].mean(axis=0) for k in keys])
        return keys, means

    def variances(self):
        """
        Variância amostral (ddof=1) por chave e por amostra.

        Returns:
            tuple: (contagens (K,), variâncias (K, m))
        """
        counts = np.array([self.traces[k].shape[0] for k in self.keys])
        if np.any(counts < 2):
            raise DomainError("São necessários ao menos 2 traços por chave para estimar a variância")
        variances = np.vstack([self.traces[k].var(axis=0, ddof=1) for k in self.keys])
        return counts, variances

    def stacked(self):
        """
        Retorna todos os traços empilhados com os respectivos rótulos.

        Returns:
            tuple: (traços (n, m), rótulos (n,))
        """
        if not self.traces:
            return np.empty((0, self.m)), np.empty(0, dtype=int)
        samples = np.vstack([self.traces[k] for k in self.keys])
        labels = np.concatenate([np.full(self.traces[k].shape[0], k) for k in self.keys])
        return samples, labels

    def head(self, n):
        """Mantém apenas os n primeiros traços de cada chave."""
        return TraceSet(self.m, self.B, {k: v[:n] for k, v in self.traces.items()}, self.role)

    def restrict(self, keys):
        """Mantém apenas as chaves informadas."""
        return TraceSet(self.m, self.B, {k: self.get(k) for k in keys}, self.role)

    def with_role(self, role):
        return TraceSet(self.m, self.B, self.traces, role)

    def split(self, n_profiling):
        """
        Divide cada chave em perfilamento (n primeiros traços) e ataque (restante).

        Args:
            n_profiling (int): Traços de perfilamento por chave

        Returns:
            tuple: (TraceSet de perfilamento, TraceSet de ataque)
        """
        profiling = {k: v[:n_profiling] for k, v in self.traces.items()}
        attack = {k: v[n_profiling:] for k, v in self.traces.items() if v.shape[0] > n_profiling}
        return (
            TraceSet(self.m, self.B, profiling, "profiling"),
            TraceSet(self.m, self.B, attack, "attack"),
        )


@dataclass(frozen=True, eq=False)
class Dataset:
    """Par (perfilamento, ataque) com metadados de proveniência."""

    profiling: TraceSet
    attack: TraceSet
    source: str = "synthetic"
    fmt: str = "canonical-text"

    def __post_init__(self):
        if self.profiling.m != self.attack.m or self.profiling.B != self.attack.B:
            raise DomainError("Conjuntos de perfilamento e ataque com m ou B diferentes")

    @property
    def m(self):
        return self.profiling.m

    @property
    def B(self):
        return self.profiling.B

    @property
    def provenance(self):
        return {
            "source": self.source,
            "format": self.fmt,
            "m": self.m,
            "B": self.B,
            "profiling_counts": self.profiling.counts,
            "attack_counts": self.attack.counts,
        }
