"""
Compressão por seleção de amostras: scores DoM / SOST / SNR e construção
do conjunto de seleção (matriz de amostragem P e sua diagonal P̂ = PᵀP).
"""
import logging
from dataclasses import dataclass

import numpy as np

from utils.constants import ALLAP_THRESHOLD, PPC_METHODS, VARIANCE_EPSILON, WINDOW_FLOOR_FACTOR
from utils.errors import DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SelectionSet:
    """
    Conjunto estritamente crescente de índices em [0, m).

    Representa P (uma linha por índice) e P̂ (diagonal com 1 nos índices).
    """

    m: int
    indices: tuple = ()

    def __post_init__(self):
        indices = tuple(sorted(set(int(i) for i in self.indices)))
        if len(indices) != len(tuple(self.indices)):
            raise DomainError("Índices de seleção repetidos")
        if indices and (indices[0] < 0 or indices[-1] >= self.m):
            raise DomainError(f"Índices de seleção fora de [0, {self.m})")
        object.__setattr__(self, "indices", indices)

    @classmethod
    def full(cls, m):
        return cls(m, tuple(range(m)))

    @classmethod
    def parse(cls, text):
        """Lê o formato de uma linha "m_c/m: i0,i1,...". """
        try:
            head, _, body = text.partition(":")
            m_c, m = (int(v) for v in head.strip().split("/"))
            indices = tuple(int(v) for v in body.split(",") if v.strip())
        except ValueError as e:
            raise DomainError(f"Seleção mal formada: {text!r}") from e
        if len(indices) != m_c:
            raise DomainError(f"Seleção declara {m_c} índices mas lista {len(indices)}")
        return cls(m, indices)

    def __len__(self):
        return len(self.indices)

    def __contains__(self, index):
        return index in self.indices

    def __eq__(self, other):
        return isinstance(other, SelectionSet) and self.m == other.m and self.indices == other.indices

    def __hash__(self):
        return hash((self.m, self.indices))

    def __str__(self):
        return f"{len(self.indices)}/{self.m}: " + ",".join(str(i) for i in self.indices)

    @property
    def array(self):
        return np.array(self.indices, dtype=int)

    def issubset(self, other):
        return self.m == other.m and set(self.indices) <= set(other.indices)

    def intersection(self, other):
        if self.m != other.m:
            raise DomainError("Seleções com comprimentos ambientes diferentes")
        return SelectionSet(self.m, tuple(sorted(set(self.indices) & set(other.indices))))

    def sampling_matrix(self):
        """Matriz P (|sel| x m) com um único 1 por linha."""
        P = np.zeros((len(self.indices), self.m))
        P[np.arange(len(self.indices)), self.indices] = 1.0
        return P

    def diagonal(self):
        """Matriz diagonal P̂ = PᵀP (m x m)."""
        D = np.zeros((self.m, self.m))
        D[self.indices, self.indices] = 1.0
        return D


@dataclass(frozen=True)
class CompressionMethod:
    """
    Método de seleção de amostras.

    Args:
        variant (str): "dom" (k pontos por clock), "allap", "sost" ou "snr"
        points_per_clock (int): k da família DoM-ppc
        clock_len (int): Amostras por janela de clock
        threshold (float): Fração do score máximo (allap)
        count (int): Número global de amostras (sost / snr)
    """

    variant: str
    points_per_clock: int = 1
    clock_len: int = 25
    threshold: float = ALLAP_THRESHOLD
    count: int = 20

    def __post_init__(self):
        if self.variant not in ("dom", "allap", "sost", "snr"):
            raise DomainError(f"Método de compressão desconhecido: {self.variant}")
        if self.variant == "dom":
            if self.points_per_clock < 1:
                raise DomainError("points_per_clock deve ser >= 1")
            if self.points_per_clock > self.clock_len:
                raise DomainError(
                    f"points_per_clock={self.points_per_clock} excede clock_len={self.clock_len}"
                )
        if self.variant in ("sost", "snr") and self.count < 1:
            raise DomainError("count deve ser >= 1")
        if self.variant == "allap" and not 0 <= self.threshold < 1:
            raise DomainError("threshold do allap deve estar em [0, 1)")

    @classmethod
    def parse(cls, spec, clock_len=25):
        """
        Lê um nome de método: "1ppc", "3ppc", "20ppc", "allap", "allap@0.2",
        "sost@20" ou "snr@20".

        Args:
            spec (str): Nome do método
            clock_len (int): Amostras por janela

        Returns:
            CompressionMethod: Método correspondente
        """
        name, _, arg = spec.strip().lower().partition("@")
        try:
            if name in PPC_METHODS:
                return cls("dom", points_per_clock=PPC_METHODS[name], clock_len=clock_len)
            if name.endswith("ppc"):
                return cls("dom", points_per_clock=int(name[:-3]), clock_len=clock_len)
            if name == "allap":
                return cls("allap", clock_len=clock_len, threshold=float(arg) if arg else ALLAP_THRESHOLD)
            if name in ("sost", "snr"):
                return cls(name, clock_len=clock_len, count=int(arg) if arg else 20)
        except ValueError as e:
            raise DomainError(f"Método de compressão mal formado: {spec!r}") from e
        raise DomainError(f"Método de compressão desconhecido: {spec!r}")

    @property
    def label(self):
        if self.variant == "dom":
            return f"{self.points_per_clock}ppc"
        if self.variant == "allap":
            return "allap" if self.threshold == ALLAP_THRESHOLD else f"allap@{self.threshold:g}"
        return f"{self.variant}@{self.count}"


def _require_keys(profiling, minimum=2):
    if len(profiling.keys) < minimum:
        raise DomainError(
            f"O conjunto de perfilamento precisa de ao menos {minimum} chaves distintas, tem {len(profiling.keys)}"
        )


def dom_scores(profiling):
    """
    Diferença de médias: max sobre pares de chaves de |média(k1) - média(k2)|.

    O máximo sobre pares é a amplitude (max - min) das médias por chave.

    Args:
        profiling (TraceSet): Traços de perfilamento

    Returns:
        np.ndarray: Score por amostra (m,)
    """
    _require_keys(profiling)
    _, means = profiling.mean_traces()
    return means.max(axis=0) - means.min(axis=0)


def sost_scores(profiling):
    """
    Soma dos quadrados das diferenças-t par a par.

    Args:
        profiling (TraceSet): Traços de perfilamento (>= 2 traços por chave)

    Returns:
        np.ndarray: Score por amostra (m,)
    """
    _require_keys(profiling)
    _, means = profiling.mean_traces()
    counts, variances = profiling.variances()
    scaled = variances / counts[:, np.newaxis]

    scores = np.zeros(profiling.m)
    # um laço por chave com o resto vetorizado mantém a memória em O(K*m)
    for i in range(len(means) - 1):
        diff = means[i] - means[i + 1:]
        denom = np.maximum(scaled[i] + scaled[i + 1:], VARIANCE_EPSILON)
        scores += (diff ** 2 / denom).sum(axis=0)
    return scores


def snr_scores(profiling):
    """
    Relação sinal-ruído: Var das médias por chave / média das variâncias por chave.

    Args:
        profiling (TraceSet): Traços de perfilamento (>= 2 traços por chave)

    Returns:
        np.ndarray: Score por amostra (m,), limitado a 1/epsilon
    """
    _require_keys(profiling)
    _, means = profiling.mean_traces()
    _, variances = profiling.variances()
    signal = means.var(axis=0)
    noise = np.maximum(variances.mean(axis=0), VARIANCE_EPSILON)
    return np.minimum(signal / noise, 1.0 / VARIANCE_EPSILON)


SCORERS = {
    "dom": dom_scores,
    "allap": dom_scores,
    "sost": sost_scores,
    "snr": snr_scores,
}


def _top(scores, k):
    # ordenação estável: empates favorecem o menor índice
    order = np.argsort(-scores, kind="stable")
    return order[:k]


def select_from_scores(method, scores, floor_factor=WINDOW_FLOOR_FACTOR):
    """
    Aplica a regra de seleção de um método a um vetor de scores.

    Args:
        method (CompressionMethod): Método de seleção
        scores (np.ndarray): Score por amostra
        floor_factor (float): Piso das janelas ppc em múltiplos da mediana

    Returns:
        SelectionSet: Índices selecionados em ordem crescente
    """
    scores = np.asarray(scores, dtype=float)
    m = scores.shape[0]

    if method.variant == "dom":
        floor = floor_factor * np.median(scores)
        chosen = []
        for start in range(0, m, method.clock_len):
            window = scores[start:start + method.clock_len]
            if window.max() <= floor:
                continue
            chosen.extend(start + _top(window, min(method.points_per_clock, window.shape[0])))
    elif method.variant == "allap":
        chosen = np.flatnonzero(scores > method.threshold * scores.max())
    else:
        if method.count > m:
            raise DomainError(f"count={method.count} excede o tamanho do traço m={m}")
        chosen = _top(scores, method.count)

    if len(chosen) == 0:
        raise DomainError(
            f"Seleção vazia para {method.label}: score máximo {scores.max():.4g}, "
            f"mediana {np.median(scores):.4g}"
        )
    return SelectionSet(m, tuple(int(i) for i in chosen))


def select(method, profiling, floor_factor=WINDOW_FLOOR_FACTOR):
    """
    Constrói o conjunto de seleção a partir dos traços de perfilamento.

    Args:
        method (CompressionMethod): Método de seleção
        profiling (TraceSet): Traços de perfilamento

    Returns:
        SelectionSet: Conjunto Ω_P̂
    """
    scores = SCORERS[method.variant](profiling)
    selection = select_from_scores(method, scores, floor_factor)
    logger.debug("Seleção %s: %d de %d amostras", method.label, len(selection), profiling.m)
    return selection


def compress(trace, sel):
    """
    Compressão P·L: recolhe as amostras nos índices selecionados.

    Args:
        trace (LeakageTrace | np.ndarray): Traço (m,) ou lote de traços (n, m)
        sel (SelectionSet): Conjunto de seleção

    Returns:
        np.ndarray: Amostras comprimidas (|sel|,) ou (n, |sel|)
    """
    samples = trace.samples if hasattr(trace, "samples") else np.asarray(trace, dtype=float)
    if samples.shape[-1] != sel.m:
        raise DomainError(f"Traço de tamanho {samples.shape[-1]} para seleção sobre m={sel.m}")
    return samples[..., list(sel.indices)]


class CompressionAgent:
    """
    Agente que guarda um método de compressão e a seleção derivada dele.
    """

    def __init__(self, method, floor_factor=WINDOW_FLOOR_FACTOR):
        self.method = method
        self.floor_factor = floor_factor
        self.selection = None

    def fit(self, profiling):
        self.selection = select(self.method, profiling, self.floor_factor)
        return self.selection

    def transform(self, traces):
        if self.selection is None:
            raise DomainError("CompressionAgent.fit deve ser chamado antes de transform")
        return compress(traces, self.selection)
