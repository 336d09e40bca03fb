"""
Protocolo experimental completo: calibração do ruído na chave 0, fase de
projeto (Ω_P̂, F*, G), ensaios de ataque por esquema (OA, RnF, RnP, ArN) e
varreduras sobre A, I_a, rho e pares (S_D, S_A), com relatórios CSV e texto.
"""
import logging
import math
import os
from dataclasses import dataclass, field
from functools import reduce

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from tqdm import tqdm

from agents.attack_agent import AttackOutcome, TemplateAttackAgent
from agents.channel_agent import ChannelAgent, rnp_capacity_draws
from agents.compression_agent import CompressionMethod, select
from agents.leakage_agent import (
    DeviceNoise, LeakageAgent, LeakageModel, default_informative_indices, make_synthetic_model,
)
from agents.metrics_agent import EnergyNormalizer, ExperimentStats
from agents.noise_agent import NoiseDesignAgent, NoisePlan, NoiseSpec
from data.trace_store import ingest
from data.traces import Dataset, TraceSet
from utils.constants import (
    A_INDEPENDENT_SCHEMES, CAPACITY_COLUMNS, RESULT_COLUMNS, SCHEME_ORDER, VARIANCE_EPSILON, WINDOW_FLOOR_FACTOR,
)
from utils.errors import DomainError
from utils.helpers import create_scheme_table, derive_rng, format_ee, format_percentage, render_table

logger = logging.getLogger(__name__)

# fluxos independentes de aleatoriedade derivados da semente mestre
MODEL_STREAM = 100
DESIGN_STREAM = 101
PROFILE_STREAM = 102
CAPACITY_STREAM = 103
SCHEME_STREAM = {name: i for i, name in enumerate(SCHEME_ORDER)}


class TraceSource:
    """
    Origem dos traços do protocolo: traços brutos de projeto, de
    perfilamento e de ataque de um dispositivo sem o ruído do projetista.
    """

    m = None
    B = None
    device_noise = None

    def design_set(self, n, rng):
        raise NotImplementedError

    def profiling_traces(self, key, n, rng):
        raise NotImplementedError

    def attack_traces(self, key, n, rng):
        raise NotImplementedError

    def signals(self, keys):
        raise NotImplementedError


class SyntheticSource(TraceSource):
    """Dispositivo sintético (modelo de vazamento + ruído gaussiano)."""

    def __init__(self, leakage):
        self.leakage = leakage
        self.m = leakage.m
        self.B = leakage.B
        self.device_noise = leakage.noise

    @classmethod
    def from_config(cls, config):
        """
        Constrói o dispositivo descrito pela configuração.

        Args:
            config (ExperimentConfig): Parâmetros do modelo

        Returns:
            SyntheticSource: Origem sintética
        """
        informative = default_informative_indices(config.m, config.informative, config.clock_len)
        if config.model == "linear":
            rng = derive_rng(config.seed, MODEL_STREAM)
            model = make_synthetic_model(config.m, config.B, informative, rng, config.w_scale)
        elif config.model == "hd":
            model = LeakageModel.hamming_distance_model(config.m, config.B, informative, config.hd_reference)
        else:
            model = LeakageModel.hamming_weight_model(config.m, config.B, informative)
        logger.info(
            "Dispositivo sintético: modelo %s, m=%d, B=%d, %d amostras informativas, sigma_N=%.3g",
            config.model, config.m, config.B, len(informative), config.sigma_n,
        )
        return cls(LeakageAgent(model, DeviceNoise(config.mu_n, config.sigma_n)))

    def design_set(self, n, rng):
        return self.leakage.generate(range(1 << self.B), n, rng, role="design")

    def profiling_traces(self, key, n, rng):
        return self.leakage.draw(key, n, rng)

    def attack_traces(self, key, n, rng):
        return self.leakage.draw(key, n, rng)

    def signals(self, keys):
        return self.leakage.model.signals(list(keys))


class DatasetSource(TraceSource):
    """
    Traços gravados: perfilamento em ordem a partir do conjunto de
    perfilamento e ataque sorteado (sem reposição) do conjunto de ataque.
    """

    def __init__(self, dataset):
        self.dataset = dataset
        self.m = dataset.m
        self.B = dataset.B
        _, variances = dataset.profiling.variances()
        # o sinal médio por chave absorve a média do ruído
        self.device_noise = DeviceNoise(0.0, float(np.sqrt(max(variances.mean(), VARIANCE_EPSILON))))

    def _available(self, trace_set, key, n):
        available = trace_set.get(key).shape[0]
        if available < n:
            raise DomainError(f"Chave {key}: {available} traços ({trace_set.role}), necessários {n}")
        return available

    def design_set(self, n, rng):
        available = min(self.dataset.profiling.counts.values())
        if available < n:
            raise DomainError(f"design_trace_count={n} excede os {available} traços disponíveis por chave")
        return self.dataset.profiling.head(n).with_role("design")

    def profiling_traces(self, key, n, rng):
        self._available(self.dataset.profiling, key, n)
        return self.dataset.profiling.take(key, slice(0, n))

    def attack_traces(self, key, n, rng):
        available = self._available(self.dataset.attack, key, n)
        return self.dataset.attack.take(key, rng.choice(available, size=n, replace=False))

    def signals(self, keys):
        return np.vstack([self.dataset.profiling.get(k).mean(axis=0) for k in keys])


def build_source(config):
    """Origem de traços da configuração (sintética ou dataset ingerido)."""
    if config.source == "dataset":
        layout = {}
        if config.dataset_format == "grizzly-adapter":
            layout = dict(zip(("keys", "traces_per_key", "samples"), config.layout))
            layout["attack_count"] = config.attack_count
        dataset = ingest(config.dataset_path, config.dataset_format, config.profiling_count, **layout)
        return DatasetSource(dataset)
    return SyntheticSource.from_config(config)


def synthesize_dataset(source, n_profiling, n_attack, rng):
    """
    Gera um Dataset completo (todas as chaves) a partir de uma origem sintética.

    Args:
        source (SyntheticSource): Dispositivo
        n_profiling (int): Traços de perfilamento por chave
        n_attack (int): Traços de ataque por chave
        rng (np.random.Generator): Fonte semeada

    Returns:
        Dataset: Perfilamento e ataque
    """
    keys = range(1 << source.B)
    profiling = source.leakage.generate(keys, n_profiling, rng, role="profiling")
    attack = source.leakage.generate(keys, n_attack, rng, role="attack")
    return Dataset(profiling, attack, source="synthetic", fmt="canonical-text")


def calibrate_noise(raw):
    """
    Média e desvio padrão de todas as amostras dos traços brutos da chave 0.

    Todos os esquemas de ruído usam esses parâmetros, então as fontes são
    geradas pela mesma distribuição.

    Args:
        raw (TraceSet): Traços brutos (sem ruído do projetista)

    Returns:
        tuple: (mu, sigma)
    """
    if 0 not in raw.traces:
        raise DomainError("Calibração do ruído exige traços da chave 0")
    samples = raw.get(0)
    return float(samples.mean()), float(samples.std())


def build_noise_spec(mu, sigma, rho=1.0, E_A=0.0):
    """NoiseSpec calibrado, com piso no desvio quando os traços são constantes."""
    if not sigma > 0:
        floor = math.sqrt(VARIANCE_EPSILON)
        logger.warning("Desvio calibrado nulo: usando o piso %.3g", floor)
        sigma = floor
    return NoiseSpec(mu, sigma, rho, E_A)


def design_phase(raw, S_D, design_trace_count, spec, rng, A=None, clock_len=25,
                 floor_factor=WINDOW_FLOOR_FACTOR):
    """
    Fase de projeto: seleção Ω_P̂, plano ArN ótimo e matriz de transição.

    Args:
        raw (TraceSet): Traços brutos de projeto
        S_D (CompressionMethod | str): Método de amostragem do projetista
        design_trace_count (int): Traços por chave usados na seleção
        spec (NoiseSpec): Parâmetros da fonte (orçamento em E_A)
        rng (np.random.Generator): Fonte semeada (subconjunto de F* quando |Ω_P̂| > A)
        A (int, opcional): Orçamento de impulsos direto

    Returns:
        tuple: (SelectionSet Ω_P̂, NoisePlan, TransitionMatrix)
    """
    available = min(raw.counts.values()) if raw.traces else 0
    if design_trace_count > available:
        raise DomainError(f"design_trace_count={design_trace_count} excede os {available} traços por chave")
    method = S_D if isinstance(S_D, CompressionMethod) else CompressionMethod.parse(S_D, clock_len)
    omega_P = select(method, raw.head(design_trace_count), floor_factor)
    plan, G = NoiseDesignAgent(spec, A).design(omega_P, rng)
    return omega_P, plan, G


def recommend_design_method(results, srr_tolerance=0.15):
    """
    Escolhe o método de amostragem do projetista a partir de uma grade (S_D, S_A).

    Entre os S_D cujo pior SRR do ArN (máximo sobre os atacantes) fica a até
    `srr_tolerance` do melhor pior caso, vence o de maior EE_avg médio;
    empates vão para o menor pior SRR e depois para o nome.

    Args:
        results (pd.DataFrame): Linhas de resultado (colunas de RESULT_COLUMNS)
        srr_tolerance (float): Tolerância absoluta de SRR

    Returns:
        str | None: Método recomendado (None sem linhas ArN)
    """
    arn = results[results["scheme"] == "ArN"]
    if arn.empty:
        return None
    summary = arn.groupby("S_D").agg(worst_srr=("SRR", "max"), mean_ee=("EE_avg", "mean")).reset_index()
    eligible = summary[summary["worst_srr"] <= summary["worst_srr"].min() + srr_tolerance]
    ranked = eligible.sort_values(["mean_ee", "worst_srr", "S_D"], ascending=[False, True, True])
    return str(ranked.iloc[0]["S_D"])


@dataclass(frozen=True)
class SweepPoint:
    """Um ponto de varredura: valores efetivos das variáveis do protocolo."""

    index: int
    value: object
    s_d: str
    s_a: str
    rho: float
    E_A: float = None
    A: int = None
    I_a: int = 1


@dataclass
class PointResult:
    """Resultados de um ponto: artefatos de projeto, linhas e acumuladores."""

    point: SweepPoint
    omega_P: object = None
    sel_attacker: object = None
    plan: object = None
    transition: object = None
    rows: list = field(default_factory=list)
    capacity: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    rnp_capacity: tuple = None
    error: str = None


@dataclass
class SweepReport:
    """Resultado completo de uma varredura."""

    sweep: str
    results: pd.DataFrame
    capacity: pd.DataFrame
    points: list
    recommendation: str = None

    @property
    def failed(self):
        return [p for p in self.points if p.error]

    def summary_text(self):
        lines = [f"Varredura: {self.sweep}", ""]
        lines.append(render_table(create_scheme_table(self.results)))
        if not self.results.empty:
            display = self.results.copy()
            display["SRR"] = display["SRR"].map(format_percentage)
            display["EE_avg"] = display["EE_avg"].map(format_ee)
            lines += ["", render_table(display, {c: c for c in ("point", "scheme", "S_D", "S_A", "A", "rho",
                                                                   "I_a", "omega_p", "omega_f", "SRR", "EE_avg")})]
        if self.recommendation:
            lines += ["", f"Método de amostragem recomendado ao projetista: {self.recommendation}"]
        for result in self.failed:
            lines += ["", f"Ponto {result.point.value} abortado: {result.error}"]
        return "\n".join(lines) + "\n"

    def design_text(self):
        blocks = []
        for result in self.points:
            if result.omega_P is None:
                continue
            block = [
                f"== ponto {result.point.value} (S_D={result.point.s_d}, S_A={result.point.s_a}) ==",
                f"Ω_P̂ = {result.omega_P}",
                f"seleção do atacante = {result.sel_attacker}",
                result.plan.to_text(),
                result.transition.to_text(),
            ]
            if result.rnp_capacity:
                block.append("capacidade RnP (média, desvio) = {:.6g}, {:.6g} bits".format(*result.rnp_capacity))
            blocks.append("\n".join(block))
        return "\n\n".join(blocks) + "\n"


def capacity_table(point_results):
    """Linhas de capacidade de todos os pontos, nas colunas de CAPACITY_COLUMNS."""
    rows = [row for result in point_results for row in result.capacity]
    return pd.DataFrame(rows, columns=CAPACITY_COLUMNS)


class ExperimentAgent:
    """
    Agente que conduz o protocolo experimental sobre uma origem de traços.
    """

    def __init__(self, config, source=None, attacker=None):
        """
        Args:
            config (ExperimentConfig): Configuração validada
            source (TraceSource, opcional): Origem de traços (padrão: a da configuração)
            attacker (TemplateAttackAgent, opcional): Perfil salvo usado no lugar
                do perfilamento em todos os pontos e esquemas
        """
        self.config = config
        self.source = source or build_source(config)
        if attacker is not None and (attacker.sel.m != self.source.m or attacker.model.B != self.source.B):
            raise DomainError(
                f"Perfil para m={attacker.sel.m}, B={attacker.model.B} incompatível com "
                f"m={self.source.m}, B={self.source.B}"
            )
        self.attacker = attacker
        self.keys = config.attack_keys(self.source.B)
        self._raw = None
        self._calibration = None

    @property
    def raw(self):
        """Traços brutos de projeto (design_trace_count por chave), gerados uma vez."""
        if self._raw is None:
            rng = derive_rng(self.config.seed, DESIGN_STREAM)
            self._raw = self.source.design_set(self.config.design_trace_count, rng)
        return self._raw

    @property
    def calibration(self):
        if self._calibration is None:
            mu, sigma = calibrate_noise(self.raw)
            if self.config.mu_a is not None:
                mu = self.config.mu_a
            if self.config.sigma_a is not None:
                sigma = self.config.sigma_a
            self._calibration = (mu, sigma)
            logger.info("Fonte de ruído: mu=%.4g, sigma=%.4g", mu, sigma)
        return self._calibration

    def method(self, name):
        return CompressionMethod.parse(name, self.config.clock_len)

    def noise_spec(self, rho, E_A=None):
        """
        NoiseSpec calibrado para um ganho. Sem E_A, o orçamento cobre as m
        amostras (a mesma energia do RnF).
        """
        mu, sigma = self.calibration
        spec = build_noise_spec(mu, sigma, rho)
        if E_A is None:
            E_A = self.source.m * spec.impulse_energy
        return NoiseSpec(spec.mu_a, spec.sigma_a, rho, E_A)

    def points(self):
        """
        Pontos da varredura configurada.

        Returns:
            list: SweepPoints em ordem
        """
        cfg = self.config
        base = dict(s_d=cfg.s_d, s_a=cfg.s_a, rho=cfg.rho, E_A=cfg.E_A, A=cfg.A, I_a=cfg.I_a)
        if cfg.sweep == "none":
            return [SweepPoint(0, "-", **base)]
        points = []
        if cfg.sweep == "grid":
            for i, (s_d, s_a) in enumerate(cfg.grid):
                points.append(SweepPoint(i, f"{s_d}/{s_a}", **{**base, "s_d": s_d, "s_a": s_a}))
            return points
        for i, value in enumerate(cfg.sweep_values):
            params = dict(base)
            if cfg.sweep == "A":
                params["A"] = int(value)
            elif cfg.sweep == "I_a":
                params["I_a"] = int(value)
            else:
                params["rho"] = float(value)
                if cfg.rho_scales_budget and cfg.E_A is not None:
                    params["E_A"] = float(value) ** 2 * cfg.E_A
            points.append(SweepPoint(i, value, **params))
        return points

    def design(self, point=None):
        """
        Executa a fase de projeto de um ponto.

        Returns:
            tuple: (Ω_P̂, NoisePlan, TransitionMatrix)
        """
        point = point or self.points()[0]
        spec = self.noise_spec(point.rho, point.E_A)
        rng = derive_rng(self.config.seed, point.index, DESIGN_STREAM)
        return design_phase(
            self.raw, self.method(point.s_d), self.config.design_trace_count, spec, rng,
            A=point.A, clock_len=self.config.clock_len, floor_factor=self.config.floor_factor,
        )

    def attacker_selection(self, point):
        """Seleção do atacante (S_A) sobre os mesmos traços de projeto."""
        cfg = self.config
        return select(self.method(point.s_a), self.raw.head(cfg.design_trace_count), cfg.floor_factor)

    def build_attacker(self, point, scheme):
        """Projeto, seleção do atacante e perfilamento de um esquema em um ponto."""
        _, arn_plan, _ = self.design(point)
        plan, spec = self.scheme_setup(scheme, arn_plan, self.noise_spec(point.rho, point.E_A))
        return self.fit_attacker(point, scheme, plan, spec, self.attacker_selection(point))

    def scheme_setup(self, scheme, arn_plan, spec):
        """
        Plano e NoiseSpec de um esquema: OA sem plano, RnF com o próprio
        ganho, RnP com |Ω_F| amostras sorteadas e ArN com o plano projetado.
        """
        if scheme == "OA":
            return None, spec
        if scheme == "RnF":
            rnf_spec = NoiseSpec(spec.mu_a, spec.sigma_a, self.config.rnf_rho, 0.0)
            return NoisePlan.rnf(self.source.m), rnf_spec
        if scheme == "RnP":
            return NoiseDesignAgent(spec).matched_rnp(arn_plan), spec
        return arn_plan, spec

    def fit_attacker(self, point, scheme, plan, spec, sel_attacker):
        """
        Perfila o atacante sobre todas as chaves com o ruído implantado.

        Returns:
            TemplateAttackAgent: Templates do ponto/esquema
        """
        cfg = self.config
        agent = NoiseDesignAgent(spec)
        rng = derive_rng(cfg.seed, point.index, SCHEME_STREAM[scheme], PROFILE_STREAM)
        profiling = {}
        for key in range(1 << self.source.B):
            traces = self.source.profiling_traces(key, cfg.I_p, rng)
            if plan is not None and cfg.noisy_profiling:
                traces = traces + agent.generate(plan, rng, n=cfg.I_p)
            profiling[key] = traces
        return TemplateAttackAgent.fit(TraceSet(self.source.m, self.source.B, profiling), sel_attacker)

    def evaluate(self, point, scheme, plan, spec, attacker):
        """
        N_T ataques com I_a traços para cada chave atacada.

        Returns:
            ExperimentStats: Acertos, EE e energias
        """
        cfg = self.config
        agent = NoiseDesignAgent(spec)
        normalizer = None if plan is None else EnergyNormalizer(cfg.n_tests, self.source.m, spec.sigma_a ** 2)
        stats = ExperimentStats(len(self.keys), cfg.n_tests)
        for key in self.keys:
            for trial in range(cfg.n_tests):
                rng = derive_rng(cfg.seed, point.index, SCHEME_STREAM[scheme], key, trial)
                traces = self.source.attack_traces(key, point.I_a, rng)
                energy = 0.0
                if plan is not None:
                    noise = agent.generate(plan, rng, n=point.I_a)
                    traces = traces + noise
                    energy = float(np.sum(noise ** 2))
                stats.record(AttackOutcome(key, attacker.guess(traces), point.I_a, energy), normalizer)
        return stats

    def run_point(self, point):
        """
        Executa um ponto de varredura para todos os esquemas configurados.

        Args:
            point (SweepPoint): Ponto a executar

        Returns:
            PointResult: Artefatos e resultados (com `error` se o ponto abortou)
        """
        cfg = self.config
        result = PointResult(point)
        try:
            omega_P, arn_plan, G = self.design(point)
            sel_attacker = self.attacker.sel if self.attacker else self.attacker_selection(point)
            result.omega_P, result.plan, result.transition, result.sel_attacker = omega_P, arn_plan, G, sel_attacker
            spec = self.noise_spec(point.rho, point.E_A)
            channel = ChannelAgent(self.source.signals(self.keys), self.source.device_noise, cfg.capacity_base)

            for scheme in [s for s in SCHEME_ORDER if s in cfg.schemes]:
                plan, scheme_spec = self.scheme_setup(scheme, arn_plan, spec)
                attacker = self.attacker or self.fit_attacker(point, scheme, plan, scheme_spec, sel_attacker)
                stats = self.evaluate(point, scheme, plan, scheme_spec, attacker)
                result.stats[scheme] = stats
                result.rows.append({
                    "sweep": cfg.sweep,
                    "point": point.value,
                    "scheme": scheme,
                    "S_D": point.s_d,
                    "S_A": point.s_a,
                    "A": arn_plan.A,
                    "rho": scheme_spec.rho,
                    "I_p": cfg.I_p,
                    "I_a": point.I_a,
                    "omega_p": len(omega_P),
                    "omega_f": 0 if plan is None else plan.count,
                    "SRR": stats.srr,
                    "EE_avg": stats.ee_avg,
                    "noise_energy": stats.total_noise_energy,
                    "n_trials": stats.n_trials,
                })
                report = channel.report(sel_attacker, plan, scheme_spec)
                result.capacity.append({
                    "sweep": cfg.sweep, "point": point.value, "scheme": scheme,
                    "A": arn_plan.A, "rho": scheme_spec.rho, **report.as_row(),
                })
                logger.debug("Ponto %s, %s: SRR=%.4f", point.value, scheme, stats.srr)

            if "RnP" in cfg.schemes and cfg.rnp_draws > 0:
                draws = rnp_capacity_draws(
                    channel.signals, sel_attacker, arn_plan.rank, arn_plan.A, spec, self.source.device_noise,
                    derive_rng(cfg.seed, point.index, CAPACITY_STREAM), cfg.rnp_draws, cfg.capacity_base,
                )
                result.rnp_capacity = (float(draws.mean()), float(draws.std()))
        except Exception as e:
            logger.exception("Ponto %s abortado", point.value)
            result.rows, result.capacity, result.stats = [], [], {}
            result.error = f"{type(e).__name__}: {e}"
        return result

    def run_sweep(self):
        """
        Executa todos os pontos (em paralelo com `workers` > 1) e agrega.

        Returns:
            SweepReport: Tabelas de resultados e de capacidade
        """
        cfg = self.config
        points = self.points()
        # materializa os traços de projeto antes de distribuir os pontos
        _ = self.calibration
        iterator = tqdm(points, desc=f"Varredura {cfg.sweep}", disable=not cfg.progress)
        if cfg.workers > 1:
            point_results = Parallel(n_jobs=cfg.workers)(delayed(_run_point)(self, p) for p in iterator)
        else:
            point_results = [self.run_point(p) for p in iterator]
        point_results.sort(key=lambda r: r.point.index)

        if cfg.sweep == "A":
            _pool_a_independent(point_results)
        results = pd.DataFrame([row for r in point_results for row in r.rows], columns=RESULT_COLUMNS)
        recommendation = None
        if cfg.sweep == "grid":
            recommendation = recommend_design_method(results, cfg.srr_tolerance)
        failed = sum(1 for r in point_results if r.error)
        if failed:
            logger.warning("%d de %d pontos abortados", failed, len(point_results))
        return SweepReport(cfg.sweep, results, capacity_table(point_results), point_results, recommendation)

    def write_reports(self, report):
        """
        Grava CSVs, resumo, relatório de projeto e a configuração efetiva.

        Returns:
            dict: tipo -> caminho
        """
        out_dir = self.config.out_dir
        os.makedirs(out_dir, exist_ok=True)
        paths = {
            "results": os.path.join(out_dir, f"results_{report.sweep}.csv"),
            "capacity": os.path.join(out_dir, f"capacity_{report.sweep}.csv"),
            "summary": os.path.join(out_dir, f"summary_{report.sweep}.txt"),
            "design": os.path.join(out_dir, f"design_{report.sweep}.txt"),
            "config": os.path.join(out_dir, "config.env"),
        }
        report.results.to_csv(paths["results"], index=False, float_format="%.10g")
        report.capacity.to_csv(paths["capacity"], index=False, float_format="%.10g")
        with open(paths["summary"], "w") as f:
            f.write(report.summary_text())
        with open(paths["design"], "w") as f:
            f.write(report.design_text())
        with open(paths["config"], "w") as f:
            f.write(self.config.to_text())
        logger.info("Relatórios gravados em %s", out_dir)
        return paths


def _run_point(agent, point):
    return agent.run_point(point)


def _pool_a_independent(point_results):
    # OA e RnF não dependem de A: cada ponto roda os dois e as linhas recebem
    # os N_T·T_A testes agrupados (SRR, EE_avg, energia e número de testes)
    for scheme in A_INDEPENDENT_SCHEMES:
        members = [r for r in point_results if scheme in r.stats]
        if len(members) < 2:
            continue
        pooled = reduce(lambda a, b: a.merge(b), [r.stats[scheme] for r in members])
        for result in members:
            for row in result.rows:
                if row["scheme"] == scheme:
                    row["SRR"] = pooled.srr
                    row["EE_avg"] = pooled.ee_avg
                    row["noise_energy"] = pooled.total_noise_energy
                    row["n_trials"] = pooled.n_trials


def run_sweep(config, source=None, write=True):
    """
    Executa a varredura de uma configuração e grava os relatórios.

    Args:
        config (ExperimentConfig): Configuração validada
        source (TraceSource, opcional): Origem de traços (padrão: a da configuração)
        write (bool): Gravar os arquivos em config.out_dir

    Returns:
        SweepReport: Resultados agregados
    """
    agent = ExperimentAgent(config, source)
    report = agent.run_sweep()
    if write:
        agent.write_reports(report)
    return report
