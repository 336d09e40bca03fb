"""
Modelos de vazamento e geração sintética de traços (L = Y(X) + N).

Toda a aleatoriedade passa por geradores numpy explicitamente semeados;
nada aqui usa o gerador global.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from data.traces import LeakageTrace, Secret, TraceSet, binary_expand, expansion_matrix, hamming_weight
from utils.errors import DomainError

logger = logging.getLogger(__name__)

VARIANTS = ("hw", "hd", "linear")


@dataclass(frozen=True, eq=False)
class DeviceNoise:
    """Ruído gaussiano i.i.d. do dispositivo (média mu_n, desvio sigma_n)."""

    mu_n: float = 0.0
    sigma_n: float = 1.0

    def __post_init__(self):
        if not self.sigma_n > 0:
            raise DomainError(f"sigma_n deve ser > 0, recebeu {self.sigma_n}")

    @property
    def second_moment(self):
        """E[n^2] por amostra."""
        return self.sigma_n ** 2 + self.mu_n ** 2

    def draw(self, rng, size):
        return rng.normal(self.mu_n, self.sigma_n, size=size)


@dataclass(frozen=True, eq=False)
class LeakageModel:
    """
    Modelo determinístico Y(X) do segredo para o traço esperado.

    Args:
        variant (str): "hw" (peso de Hamming), "hd" (distância de Hamming) ou "linear"
        m (int): Tamanho do traço
        B (int): Largura do segredo
        W (np.ndarray, opcional): Matriz m x (B+1) do modelo linear
        weights (np.ndarray, opcional): Perfil u por amostra dos modelos HW/HD
        reference (int): Estado anterior do modelo HD (0 reduz HD a HW)
        informative (tuple): Índices das amostras que carregam sinal
    """

    variant: str
    m: int
    B: int = 8
    W: np.ndarray = None
    weights: np.ndarray = None
    reference: int = 0
    informative: tuple = field(default=())

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise DomainError(f"Variante de modelo desconhecida: {self.variant}")
        informative = tuple(sorted(int(i) for i in self.informative))
        if any(not 0 <= i < self.m for i in informative):
            raise DomainError(f"Índices informativos fora de [0, {self.m})")
        object.__setattr__(self, "informative", informative)

        if self.variant == "linear":
            if self.W is None:
                raise DomainError("O modelo linear exige a matriz W")
            W = np.array(self.W, dtype=float)
            if W.shape != (self.m, self.B + 1):
                raise DomainError(f"W tem forma {W.shape}, esperado ({self.m}, {self.B + 1})")
            W.setflags(write=False)
            object.__setattr__(self, "W", W)
        else:
            if self.weights is None:
                weights = np.zeros(self.m)
                weights[list(informative)] = 1.0
            else:
                weights = np.array(self.weights, dtype=float)
            if weights.shape != (self.m,):
                raise DomainError(f"Perfil de pesos deve ter tamanho {self.m}")
            weights.setflags(write=False)
            object.__setattr__(self, "weights", weights)
            if not 0 <= self.reference < (1 << self.B):
                raise DomainError(f"Estado de referência {self.reference} fora da faixa")

    @classmethod
    def hamming_weight_model(cls, m, B, informative, weights=None):
        return cls("hw", m, B, weights=weights, informative=tuple(informative))

    @classmethod
    def hamming_distance_model(cls, m, B, informative, reference=0, weights=None):
        return cls("hd", m, B, weights=weights, reference=reference, informative=tuple(informative))

    def signal(self, key):
        """
        Calcula o sinal determinístico Y(X).

        Args:
            key (Secret | int): Segredo

        Returns:
            np.ndarray: Vetor de tamanho m
        """
        value, B = (key.value, key.B) if isinstance(key, Secret) else (int(key), self.B)
        if B != self.B:
            raise DomainError(f"Segredo de {B} bits para um modelo de {self.B} bits")
        if self.variant == "linear":
            return self.W @ binary_expand(value, self.B)
        if not 0 <= value < (1 << self.B):
            raise DomainError(f"Segredo {value} fora da faixa")
        if self.variant == "hd":
            return hamming_weight(value ^ self.reference) * self.weights
        return hamming_weight(value) * self.weights

    def signals(self, keys):
        """Sinais de várias chaves empilhados (K, m)."""
        if self.variant == "linear":
            return expansion_matrix(keys, self.B) @ self.W.T
        return np.vstack([self.signal(k) for k in keys])


def make_synthetic_model(m, B, informative_indices, rng, scale=1.0):
    """
    Cria um modelo linear esparso com coeficientes gaussianos semeados.

    Args:
        m (int): Tamanho do traço
        B (int): Largura do segredo
        informative_indices (iterable): Linhas de W que carregam sinal
        rng (np.random.Generator): Fonte semeada
        scale (float): Desvio padrão dos coeficientes

    Returns:
        LeakageModel: Modelo linear com linhas nulas fora dos índices informativos
    """
    indices = sorted(set(int(i) for i in informative_indices))
    if not indices:
        raise DomainError("Conjunto informativo vazio: não haveria sinal para atacar")
    if indices[0] < 0 or indices[-1] >= m:
        raise DomainError(f"Índices informativos devem estar em [0, {m})")
    W = np.zeros((m, B + 1))
    W[indices] = rng.normal(0.0, scale, size=(len(indices), B + 1))
    return LeakageModel("linear", m, B, W=W, informative=tuple(indices))


def default_informative_indices(m, count, clock_len):
    """
    Posiciona `count` amostras informativas, uma no centro de cada janela de clock.

    Args:
        m (int): Tamanho do traço
        count (int): Número de amostras informativas
        clock_len (int): Amostras por janela

    Returns:
        list: Índices informativos ordenados
    """
    windows = max(1, m // clock_len)
    if count > windows:
        # mais amostras que janelas: espalhar uniformemente
        return sorted(set(np.linspace(0, m - 1, count).astype(int).tolist()))
    chosen = np.linspace(0, windows - 1, count).round().astype(int)
    return [int(w * clock_len + clock_len // 2) for w in chosen]


def synth_trace(key, model, noise, rng):
    """
    Gera um traço sintético L = Y(X) + N.

    Args:
        key (Secret): Segredo
        model (LeakageModel): Modelo de vazamento
        noise (DeviceNoise): Ruído do dispositivo
        rng (np.random.Generator): Fonte semeada

    Returns:
        LeakageTrace: Traço gerado
    """
    if key.B != model.B:
        raise DomainError(f"Segredo de {key.B} bits para um modelo de {model.B} bits")
    samples = model.signal(key) + noise.draw(rng, model.m)
    return LeakageTrace(samples, key)


class LeakageAgent:
    """
    Agente responsável por produzir traços sintéticos de um dispositivo
    (modelo de vazamento + ruído do dispositivo).
    """

    def __init__(self, model, noise):
        self.model = model
        self.noise = noise
        self._signal_cache = {}

    @property
    def m(self):
        return self.model.m

    @property
    def B(self):
        return self.model.B

    def signal(self, key):
        if key not in self._signal_cache:
            self._signal_cache[key] = self.model.signal(key)
        return self._signal_cache[key]

    def draw(self, key, n, rng):
        """
        Gera n traços brutos da mesma chave.

        Args:
            key (int): Valor da chave
            n (int): Número de traços
            rng (np.random.Generator): Fonte semeada

        Returns:
            np.ndarray: Matriz (n, m)
        """
        return self.signal(key)[np.newaxis, :] + self.noise.draw(rng, (n, self.m))

    def generate(self, keys, n_per_key, rng, role="profiling"):
        """
        Gera um TraceSet com n_per_key traços para cada chave.

        Args:
            keys (iterable): Chaves a gerar
            n_per_key (int): Traços por chave
            rng (np.random.Generator): Fonte semeada
            role (str): Papel do conjunto

        Returns:
            TraceSet: Conjunto sintético
        """
        traces = {int(k): self.draw(int(k), n_per_key, rng) for k in keys}
        logger.debug("Gerados %d traços (%s) para %d chaves", n_per_key * len(traces), role, len(traces))
        return TraceSet(self.m, self.B, traces, role)
