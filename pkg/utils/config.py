"""
Configuração de experimentos.

Arquivos de configuração usam a sintaxe plana chave=valor (a mesma de um
.env), lida com python-dotenv. Ordem de precedência: padrões < variáveis de
ambiente ARN_<CHAVE> < arquivo < flags da linha de comando.
"""
import logging
import os
from dataclasses import dataclass, field, fields, replace

import numpy as np
from dotenv import dotenv_values

from agents.compression_agent import CompressionMethod
from utils.constants import DESK_DEFAULTS, ENV_PREFIX, SCHEME_ORDER
from utils.errors import ConfigError, DomainError

logger = logging.getLogger(__name__)

SOURCES = ("synthetic", "dataset")
MODELS = ("linear", "hw", "hd")
SWEEPS = ("none", "A", "I_a", "rho", "grid")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")

_TRUE = ("1", "true", "yes", "sim", "on")
_FALSE = ("0", "false", "no", "não", "nao", "off")


def _bool(text):
    value = text.strip().lower()
    if value in _TRUE:
        return True
    if value in _FALSE:
        return False
    raise ValueError(f"esperado booleano, recebeu {text!r}")


def _optional(parser):
    def parse(text):
        return None if text.strip().lower() in ("", "none", "auto") else parser(text)
    return parse


def _list(parser):
    def parse(text):
        return [parser(v.strip()) for v in text.split(",") if v.strip()]
    return parse


def _grid(text):
    pairs = []
    for item in text.split(";"):
        if not item.strip():
            continue
        s_d, sep, s_a = item.partition(":")
        if not sep:
            raise ValueError(f"par (S_D:S_A) mal formado: {item!r}")
        pairs.append((s_d.strip(), s_a.strip()))
    return pairs


def _number(text):
    value = float(text)
    return int(value) if value.is_integer() and "." not in text else value


def _option(help_text, parse=str, **kwargs):
    return field(metadata={"parse": parse, "help": help_text}, **kwargs)


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Parâmetros de um experimento completo (geração, projeto, ataque e varredura).

    Cada campo corresponde a uma chave do arquivo de configuração e a uma
    flag --nome-do-campo da CLI.
    """

    # origem dos traços
    source: str = _option("synthetic ou dataset", default="synthetic")
    dataset_path: str = _option("arquivo de traços (source=dataset)", default="")
    dataset_format: str = _option("canonical-text, canonical-binary ou grizzly-adapter", default="canonical-text")
    profiling_count: int = _option("traços de perfilamento por chave ao dividir o dataset", _optional(int), default=None)
    attack_count: int = _option("traços de ataque por chave no grizzly-adapter", _optional(int), default=None)
    layout: list = _option("forma keys,traces_per_key,samples do grizzly-adapter", _list(int), default_factory=list)

    # dispositivo sintético
    model: str = _option("linear, hw ou hd", default="linear")
    B: int = _option("largura do segredo em bits", int, default=DESK_DEFAULTS["B"])
    m: int = _option("amostras por traço", int, default=DESK_DEFAULTS["m"])
    informative: int = _option("amostras informativas", int, default=DESK_DEFAULTS["informative"])
    clock_len: int = _option("amostras por janela de clock", int, default=DESK_DEFAULTS["clock_len"])
    w_scale: float = _option("desvio padrão dos coeficientes de W", float, default=1.0)
    mu_n: float = _option("média do ruído do dispositivo", float, default=0.0)
    sigma_n: float = _option("desvio do ruído do dispositivo", float, default=DESK_DEFAULTS["sigma_n"])
    hd_reference: int = _option("estado de referência do modelo hd", int, default=0)

    # compressão
    s_d: str = _option("método de amostragem do projetista", default="3ppc")
    s_a: str = _option("método de amostragem do atacante", default="3ppc")
    floor_factor: float = _option("piso das janelas ppc (x mediana)", float, default=2.0)

    # ruído
    schemes: list = _option("esquemas avaliados", _list(str), default_factory=lambda: list(SCHEME_ORDER))
    mu_a: float = _option("média da fonte (vazio = calibrar em k=0)", _optional(float), default=None)
    sigma_a: float = _option("desvio da fonte (vazio = calibrar em k=0)", _optional(float), default=None)
    rho: float = _option("ganho do gerador", float, default=1.0)
    E_A: float = _option("orçamento de energia por traço", _optional(float), default=None)
    A: int = _option("orçamento de impulsos direto (tem prioridade sobre E_A)", _optional(int), default=None)
    rnf_rho: float = _option("ganho do esquema RnF", float, default=1.0)
    rho_scales_budget: bool = _option("escalar E_A por rho^2 ao variar rho", _bool, default=True)

    # protocolo
    I_p: int = _option("traços de perfilamento por chave", int, default=50)
    I_a: int = _option("traços de ataque por teste", int, default=10)
    n_tests: int = _option("testes por chave (N_T)", int, default=DESK_DEFAULTS["n_tests"])
    design_trace_count: int = _option("traços de projeto por chave", int, default=50)
    n_keys: int = _option("chaves atacadas (subamostra)", int, default=DESK_DEFAULTS["n_keys"])
    keys: list = _option("lista explícita de chaves atacadas", _list(int), default_factory=list)
    full_keys: bool = _option("atacar todas as 2^B chaves", _bool, default=False)
    noisy_profiling: bool = _option("perfilamento com o ruído implantado", _bool, default=True)
    seed: int = _option("semente mestre", int, default=0)

    # varredura
    sweep: str = _option("none, A, I_a, rho ou grid", default="none")
    sweep_values: list = _option("valores da varredura", _list(_number), default_factory=list)
    grid: list = _option("pares S_D:S_A separados por ;", _grid, default_factory=list)
    srr_tolerance: float = _option("tolerância de SRR na recomendação", float, default=0.15)
    rnp_draws: int = _option("sorteios RnP na análise de capacidade", int, default=100)
    capacity_base: float = _option("base do logaritmo da capacidade", float, default=2.0)

    # execução
    out_dir: str = _option("diretório dos relatórios", default="results")
    workers: int = _option("processos paralelos para os pontos", int, default=1)
    progress: bool = _option("barras de progresso", _bool, default=True)
    log_level: str = _option("nível de log", str.upper, default="INFO")

    def __post_init__(self):
        checks = [
            ("source", self.source in SOURCES, f"opções: {', '.join(SOURCES)}"),
            ("dataset_path", self.source != "dataset" or bool(self.dataset_path), "obrigatório com source=dataset"),
            ("layout", len(self.layout) in (0, 3), "esperado keys,traces_per_key,samples"),
            ("model", self.model in MODELS, f"opções: {', '.join(MODELS)}"),
            ("B", 1 <= self.B <= 16, "deve estar em [1, 16]"),
            ("m", self.m >= 1, "deve ser >= 1"),
            ("clock_len", self.clock_len >= 1, "deve ser >= 1"),
            ("sigma_n", self.sigma_n > 0, "deve ser > 0"),
            ("rho", self.rho > 0, "deve ser > 0"),
            ("rnf_rho", self.rnf_rho > 0, "deve ser > 0"),
            ("sigma_a", self.sigma_a is None or self.sigma_a > 0, "deve ser > 0"),
            ("E_A", self.E_A is None or self.E_A >= 0, "deve ser >= 0"),
            ("A", self.A is None or self.A >= 0, "deve ser >= 0"),
            ("I_p", self.I_p >= 1, "deve ser >= 1"),
            ("I_a", self.I_a >= 1, "deve ser >= 1"),
            ("n_tests", self.n_tests >= 1, "N_T deve ser >= 1"),
            ("design_trace_count", self.design_trace_count >= 2, "deve ser >= 2"),
            ("n_keys", self.full_keys or bool(self.keys) or self.n_keys >= 1, "subconjunto de chaves vazio"),
            ("schemes", bool(self.schemes) and set(self.schemes) <= set(SCHEME_ORDER),
             f"opções: {', '.join(SCHEME_ORDER)}"),
            ("sweep", self.sweep in SWEEPS, f"opções: {', '.join(SWEEPS)}"),
            ("sweep_values", self.sweep in ("none", "grid") or bool(self.sweep_values),
             "obrigatório para a varredura escolhida"),
            ("grid", self.sweep != "grid" or bool(self.grid), "obrigatório com sweep=grid"),
            ("workers", self.workers >= 1, "deve ser >= 1"),
            ("log_level", self.log_level in LOG_LEVELS, f"opções: {', '.join(LOG_LEVELS)}"),
            ("capacity_base", self.capacity_base > 1, "deve ser > 1"),
        ]
        for key, ok, message in checks:
            if not ok:
                raise ConfigError(key, message)
        if any(not 0 <= k < (1 << self.B) for k in self.keys):
            raise ConfigError("keys", f"chaves fora de [0, 2^{self.B})")

        methods = [("s_d", self.s_d), ("s_a", self.s_a)]
        methods += [("grid", name) for pair in self.grid for name in pair]
        for key, name in methods:
            try:
                CompressionMethod.parse(name, self.clock_len)
            except DomainError as e:
                raise ConfigError(key, str(e)) from e

    def attack_keys(self, B=None):
        """
        Chaves atacadas: lista explícita, todas (full_keys) ou uma
        subamostra espaçada uniformemente que inclui 0 e 2^B - 1.
        """
        B = self.B if B is None else B
        if self.keys:
            return sorted(set(self.keys))
        if self.full_keys or self.n_keys >= (1 << B):
            return list(range(1 << B))
        return sorted(set(np.linspace(0, (1 << B) - 1, self.n_keys).round().astype(int).tolist()))

    def to_text(self):
        """Serializa no formato chave=valor aceito por load_config."""
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                text = ""
            elif f.name == "grid":
                text = ";".join(f"{a}:{b}" for a, b in value)
            elif isinstance(value, list):
                text = ",".join(str(v) for v in value)
            elif isinstance(value, bool):
                text = str(value).lower()
            else:
                text = str(value)
            lines.append(f"{f.name}={text}")
        return "\n".join(lines) + "\n"


FIELDS = {f.name: f for f in fields(ExperimentConfig)}


def parse_values(raw):
    """
    Converte valores textuais para os tipos de ExperimentConfig.

    Args:
        raw (dict): chave -> texto

    Returns:
        dict: chave -> valor tipado
    """
    values = {}
    for key, text in raw.items():
        if key not in FIELDS:
            raise ConfigError(key, "chave desconhecida")
        if text is None:
            raise ConfigError(key, "chave sem valor")
        if not isinstance(text, str):
            values[key] = text
            continue
        try:
            values[key] = FIELDS[key].metadata["parse"](text)
        except ValueError as e:
            raise ConfigError(key, str(e)) from e
    return values


def env_values(environ=None):
    """Lê as variáveis ARN_<CHAVE> do ambiente (sem diferenciar maiúsculas)."""
    environ = os.environ if environ is None else environ
    found = {}
    for name in FIELDS:
        env_key = ENV_PREFIX + name.upper()
        if env_key in environ:
            found[name] = environ[env_key]
    return found


def load_config(path=None, overrides=None, environ=None):
    """
    Monta um ExperimentConfig a partir do ambiente, de um arquivo e de overrides.

    Args:
        path (str, opcional): Arquivo chave=valor
        overrides (dict, opcional): Valores da CLI (texto ou tipados)
        environ (dict, opcional): Ambiente (padrão: os.environ)

    Returns:
        ExperimentConfig: Configuração validada
    """
    raw = env_values(environ)
    if path:
        if not os.path.exists(path):
            raise ConfigError("config", f"arquivo não encontrado: {path}")
        raw.update(dotenv_values(path))
        logger.debug("Configuração lida de %s", path)
    raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return ExperimentConfig(**parse_values(raw))


def with_overrides(config, **values):
    """Cópia validada de um ExperimentConfig com alguns campos trocados."""
    return replace(config, **values)


def add_config_arguments(parser):
    """Registra uma flag --nome-do-campo para cada campo de ExperimentConfig."""
    group = parser.add_argument_group("configuração")
    for name, f in FIELDS.items():
        group.add_argument(
            "--" + name.replace("_", "-"),
            dest=name,
            default=None,
            metavar=name.upper(),
            help=f.metadata["help"],
        )
    return parser


def config_from_args(args, environ=None):
    """Constrói a configuração a partir de argumentos do argparse (inclui --config)."""
    overrides = {name: getattr(args, name, None) for name in FIELDS}
    return load_config(getattr(args, "config", None), overrides, environ)
