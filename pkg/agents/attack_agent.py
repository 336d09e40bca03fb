"""
O atacante: perfilamento do modelo estocástico (linear) por mínimos
quadrados, templates gaussianos com covariância agrupada e recuperação da
chave por máxima verossimilhança.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from agents.compression_agent import SelectionSet, compress, select
from agents.noise_agent import NoiseDesignAgent
from data.traces import Secret, TraceSet, expansion_matrix
from utils.constants import COVARIANCE_RIDGE, PROFILE_MAGIC, TRACE_FORMAT_VERSION, VARIANCE_EPSILON
from utils.errors import DomainError, TraceFormatError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ProfiledModel:
    """Estimativa W_hat (|sel| x (B+1)) sobre as amostras comprimidas."""

    W_hat: np.ndarray
    sel: object
    B: int

    def __post_init__(self):
        if self.W_hat.shape != (len(self.sel), self.B + 1):
            raise DomainError(
                f"W_hat tem forma {self.W_hat.shape}, esperado ({len(self.sel)}, {self.B + 1})"
            )

    def mean(self, key):
        return self.W_hat @ Secret(key, self.B).bits


@dataclass(frozen=True, eq=False)
class Template:
    """Template gaussiano de uma chave (média própria, covariância agrupada)."""

    key: Secret
    mean: np.ndarray
    covariance: np.ndarray


@dataclass(frozen=True)
class AttackOutcome:
    """Resultado de um ataque com I_a traços."""

    true_key: int
    guessed_key: int
    traces_used: int
    noise_energy_spent: float = 0.0

    @property
    def success(self):
        return self.guessed_key == self.true_key


def profile(profiling, sel):
    """
    Estima W_hat resolvendo média-comprimida(k) ≈ W_hat·F_b(k) sobre as chaves.

    Args:
        profiling (TraceSet): Traços de perfilamento (ao menos B+1 chaves independentes)
        sel (SelectionSet): Seleção do atacante

    Returns:
        ProfiledModel: Modelo perfilado
    """
    if profiling.m != sel.m:
        raise DomainError(f"Traços de tamanho {profiling.m} para seleção sobre m={sel.m}")
    keys, means = profiling.mean_traces()
    design = expansion_matrix(keys, profiling.B)
    if np.linalg.matrix_rank(design) < profiling.B + 1:
        raise DomainError(
            f"Sistema linear com posto deficiente: {len(keys)} chaves para {profiling.B + 1} incógnitas"
        )
    solution, *_ = linalg.lstsq(design, compress(means, sel))
    return ProfiledModel(solution.T, sel, profiling.B)


def pooled_covariance(residuals):
    """
    Covariância agrupada dos resíduos, regularizada com ε na diagonal.

    Args:
        residuals (np.ndarray): Resíduos (n, m_c)

    Returns:
        tuple: (covariância (m_c, m_c), ε aplicado)
    """
    n, m_c = residuals.shape
    if n < m_c + 1:
        logger.warning(
            "Apenas %d resíduos para covariância %dx%d: matriz singular antes da regularização",
            n, m_c, m_c,
        )
    covariance = residuals.T @ residuals / max(n - 1, 1)
    mean_diagonal = float(np.mean(np.diag(covariance))) if m_c else 0.0
    ridge = COVARIANCE_RIDGE * mean_diagonal if mean_diagonal > 0 else VARIANCE_EPSILON
    covariance = covariance + ridge * np.eye(m_c)
    return (covariance + covariance.T) / 2, ridge


def build_templates(model, profiling):
    """
    Constrói os 2^B templates: média W_hat·F_b(k) e covariância agrupada.

    Args:
        model (ProfiledModel): Modelo perfilado
        profiling (TraceSet): Traços usados para os resíduos

    Returns:
        list: Templates em ordem crescente de chave
    """
    residuals = []
    for key in profiling.keys:
        residuals.append(compress(profiling.get(key), model.sel) - model.mean(key))
    covariance, _ = pooled_covariance(np.vstack(residuals))
    return templates_from_model(model, covariance)


def templates_from_model(model, covariance):
    """Templates das 2^B chaves a partir de um modelo perfilado e de uma covariância agrupada."""
    covariance = np.array(covariance, dtype=float)
    if covariance.shape != (len(model.sel), len(model.sel)):
        raise DomainError(f"Covariância {covariance.shape} incompatível com m_c={len(model.sel)}")
    covariance.setflags(write=False)
    return [
        Template(Secret(k, model.B), model.mean(k), covariance)
        for k in range(1 << model.B)
    ]


def write_profile(path, model, covariance):
    """
    Grava um perfil de atacante (W_hat e covariância agrupada) em texto.

    Formato: ``TEMPLATES v1 B=<B> m_c=<m_c> sel=<m_c>/<m>: i0,i1,...``,
    depois m_c linhas ``W,<B+1 valores>`` e m_c linhas ``COV,<m_c valores>``.

    Args:
        path (str): Arquivo de destino
        model (ProfiledModel): Modelo perfilado
        covariance (np.ndarray): Covariância (m_c, m_c)
    """
    with open(path, "w") as f:
        f.write(f"{PROFILE_MAGIC} v{TRACE_FORMAT_VERSION} B={model.B} m_c={len(model.sel)} sel={model.sel}\n")
        for row in model.W_hat:
            f.write("W," + ",".join(repr(float(v)) for v in row) + "\n")
        for row in np.asarray(covariance):
            f.write("COV," + ",".join(repr(float(v)) for v in row) + "\n")


def read_profile(path):
    """
    Lê um perfil gravado por write_profile.

    Returns:
        tuple: (ProfiledModel, covariância)
    """
    with open(path) as f:
        lines = [line.strip() for line in f if line.strip()]
    if not lines or not lines[0].startswith(PROFILE_MAGIC):
        raise TraceFormatError("Cabeçalho de perfil ausente", 1, record=lines[0] if lines else None)
    header = lines[0]
    head, _, sel_text = header.partition(" sel=")
    fields = head.split()
    if len(fields) < 2 or fields[1] != f"v{TRACE_FORMAT_VERSION}":
        raise TraceFormatError("Versão de perfil não suportada", 1, record=header)
    try:
        values = dict(item.split("=", 1) for item in fields[2:])
        B, m_c = int(values["B"]), int(values["m_c"])
        sel = SelectionSet.parse(sel_text)
    except (KeyError, ValueError) as e:
        raise TraceFormatError(f"Cabeçalho de perfil inválido ({e})", 1, record=header) from e
    if len(sel) != m_c or len(lines) != 1 + 2 * m_c:
        raise TraceFormatError(f"Perfil com {len(lines) - 1} linhas, esperado {2 * m_c}", len(lines), record=header)

    def rows(tag, start, width):
        block = []
        for offset in range(m_c):
            lineno = start + offset + 1
            parts = lines[start + offset].split(",")
            if parts[0] != tag or len(parts) != width + 1:
                raise TraceFormatError(f"Linha {tag} mal formada", lineno, record=lines[start + offset])
            try:
                block.append([float(v) for v in parts[1:]])
            except ValueError as e:
                raise TraceFormatError(f"Valor não numérico ({e})", lineno, record=lines[start + offset]) from e
        return np.array(block).reshape(m_c, width)

    W_hat = rows("W", 1, B + 1)
    covariance = rows("COV", 1 + m_c, m_c)
    return ProfiledModel(W_hat, sel, B), covariance


def attack(templates, attack_traces, sel):
    """
    Recuperação da chave por máxima verossimilhança.

    Args:
        templates (list): Templates (um por chave candidata)
        attack_traces (np.ndarray | list): I_a traços de uma mesma chave
        sel (SelectionSet): Seleção do atacante

    Returns:
        int: Chave com maior verossimilhança (empate -> menor chave)
    """
    if len(attack_traces) == 0:
        raise DomainError("Lista de traços de ataque vazia")
    traces = np.asarray([getattr(t, "samples", t) for t in attack_traces], dtype=float)
    return TemplateAttackAgent(sel, templates).guess(traces)


class TemplateAttackAgent:
    """
    Agente atacante: guarda a seleção e os templates de um perfilamento e
    executa ataques repetidos sobre eles.
    """

    def __init__(self, sel, templates, model=None):
        self.sel = sel
        self.templates = sorted(templates, key=lambda t: t.key.value)
        self.model = model
        self._keys = np.array([t.key.value for t in self.templates])
        self._means = np.vstack([t.mean for t in self.templates])
        factor = linalg.cho_factor(self.templates[0].covariance)
        self._whitened = linalg.cho_solve(factor, self._means.T)
        self._quadratic = np.einsum("km,mk->k", self._means, self._whitened)

    @classmethod
    def fit(cls, profiling, sel):
        """Perfila o modelo linear e constrói os templates."""
        model = profile(profiling, sel)
        return cls(sel, build_templates(model, profiling), model)

    @classmethod
    def from_profile(cls, model, covariance):
        """Reconstrói o atacante a partir de um perfil salvo (W_hat + covariância)."""
        return cls(model.sel, templates_from_model(model, covariance), model)

    @classmethod
    def load_profile(cls, path):
        """Lê um perfil gravado por save_profile e reconstrói o atacante."""
        model, covariance = read_profile(path)
        logger.info("Perfil do atacante lido de %s (%d amostras, B=%d)", path, len(model.sel), model.B)
        return cls.from_profile(model, covariance)

    def save_profile(self, path):
        if self.model is None:
            raise DomainError("Atacante sem modelo perfilado não pode ser gravado")
        write_profile(path, self.model, self.covariance)

    @property
    def covariance(self):
        return self.templates[0].covariance

    @classmethod
    def fit_with_method(cls, profiling, method):
        """Escolhe a própria seleção (S_A) nos traços de perfilamento e perfila."""
        return cls.fit(profiling, select(method, profiling))

    def guess(self, traces):
        compressed = compress(np.atleast_2d(traces), self.sel)
        if compressed.shape[0] == 0:
            raise DomainError("Lista de traços de ataque vazia")
        scores = compressed.sum(axis=0) @ self._whitened - 0.5 * compressed.shape[0] * self._quadratic
        return int(self._keys[int(np.argmax(scores))])


def run_trial(true_key, leakage, plan, spec, sel_attacker, I_p, I_a, rng,
              sel_defender=None, profile_keys=None, noisy_profiling=True, noise_agent=None):
    """
    Executa um teste completo: perfilamento (com o ruído do dispositivo
    implantado), construção de templates, I_a traços de ataque e palpite.

    Args:
        true_key (int): Chave secreta atacada
        leakage (LeakageAgent): Dispositivo (modelo + ruído)
        plan (NoisePlan | None): Plano de ruído implantado (None = OA)
        spec (NoiseSpec): Parâmetros da fonte
        sel_attacker (SelectionSet): Seleção usada pelo atacante
        I_p (int): Traços de perfilamento por chave
        I_a (int): Traços de ataque
        rng (np.random.Generator): Fonte semeada
        sel_defender (SelectionSet, opcional): Seleção do projetista (verificação de consistência)
        profile_keys (iterable, opcional): Chaves de perfilamento (padrão: todas)
        noisy_profiling (bool): Se os traços de perfilamento carregam o ruído

    Returns:
        AttackOutcome: Resultado do teste
    """
    if sel_defender is not None and plan is not None and plan.scheme == "ArN":
        if not plan.F.issubset(sel_defender):
            raise DomainError("Plano ArN não está contido na seleção do projetista")
    noise_agent = noise_agent or NoiseDesignAgent(spec)
    keys = list(range(1 << leakage.B)) if profile_keys is None else list(profile_keys)

    profiling = {}
    for key in keys:
        traces = leakage.draw(key, I_p, rng)
        if plan is not None and noisy_profiling:
            traces = traces + noise_agent.generate(plan, rng, n=I_p)
        profiling[key] = traces
    attacker = TemplateAttackAgent.fit(TraceSet(leakage.m, leakage.B, profiling), sel_attacker)

    traces = leakage.draw(true_key, I_a, rng)
    energy = 0.0
    if plan is not None:
        noise = noise_agent.generate(plan, rng, n=I_a)
        traces = traces + noise
        energy = float(np.sum(noise ** 2))
    return AttackOutcome(int(true_key), attacker.guess(traces), I_a, energy)
