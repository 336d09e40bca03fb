"""
ArN toolkit - linha de comando.

Subcomandos:
    synth         gera um dataset sintético (perfilamento + ataque)
    design        fase de projeto: Ω_P̂, plano F* e matriz de transição G
    attack        executa um único esquema no ponto configurado
    sweep         varredura completa (A, I_a, rho ou grade S_D:S_A)
    ingest-check  valida um arquivo de traços

Códigos de saída: 0 sucesso, 1 erro de domínio/configuração, 2 erro inesperado.
"""
import argparse
import logging
import os
import sys

from dotenv import load_dotenv

from agents.attack_agent import TemplateAttackAgent
from agents.experiment_agent import ExperimentAgent, SyntheticSource, synthesize_dataset
from data.trace_store import FORMATS, TraceStore, ingest
from utils.config import add_config_arguments, config_from_args, with_overrides
from utils.constants import ENV_PREFIX, SCHEME_ORDER
from utils.errors import DomainError
from utils.helpers import derive_rng, format_ee, format_percentage

# Carregar variáveis de ambiente (ARN_* de um .env, se existir)
load_dotenv()

logger = logging.getLogger("arn")

SYNTH_STREAM = 104


def cmd_synth(config, args):
    if config.source != "synthetic":
        raise DomainError("synth exige source=synthetic")
    source = SyntheticSource.from_config(config)
    n_profiling = args.n_profiling or max(config.I_p, config.design_trace_count)
    n_attack = args.n_attack or max(config.I_a, config.I_p)
    dataset = synthesize_dataset(source, n_profiling, n_attack, derive_rng(config.seed, SYNTH_STREAM))
    store = TraceStore(config.out_dir)
    path = store.save(dataset, args.name, args.format)
    print(f"Dataset sintético gravado em {path} ({n_profiling} + {n_attack} traços por chave)")
    return 0


def cmd_design(config, args):
    agent = ExperimentAgent(config)
    omega_P, plan, G = agent.design()
    text = "\n".join([f"Ω_P̂ = {omega_P}", plan.to_text(), G.to_text()]) + "\n"
    os.makedirs(config.out_dir, exist_ok=True)
    path = os.path.join(config.out_dir, "design.txt")
    with open(path, "w") as f:
        f.write(text)
    print(text, end="")
    logger.info("Relatório de projeto gravado em %s", path)
    return 0


def load_attacker(args):
    """Atacante salvo por --save-profile, quando --load-profile foi informado."""
    if not args.load_profile:
        return None
    return TemplateAttackAgent.load_profile(args.load_profile)


def cmd_attack(config, args):
    config = with_overrides(config, schemes=[args.scheme], sweep="none")
    agent = ExperimentAgent(config, attacker=load_attacker(args))
    report = agent.run_sweep()
    agent.write_reports(report)
    if report.failed:
        print(report.points[0].error, file=sys.stderr)
        return 1
    row = report.results.iloc[0]
    print(f"{args.scheme}: SRR={format_percentage(row['SRR'])} EE_avg={format_ee(row['EE_avg'])} "
          f"(|Ω_P̂|={row['omega_p']}, A={row['A']})")

    if args.save_profile:
        attacker = agent.attacker or agent.build_attacker(agent.points()[0], args.scheme)
        attacker.save_profile(args.save_profile)
        logger.info("Perfil do atacante gravado em %s", args.save_profile)
    return 0


def cmd_sweep(config, args):
    agent = ExperimentAgent(config, attacker=load_attacker(args))
    report = agent.run_sweep()
    agent.write_reports(report)
    print(report.summary_text(), end="")
    return 1 if report.failed else 0


def cmd_ingest_check(config, args):
    if not config.dataset_path:
        raise DomainError("Informe o arquivo com --dataset-path")
    layout = {}
    if config.dataset_format == "grizzly-adapter":
        layout = dict(zip(("keys", "traces_per_key", "samples"), config.layout))
        layout["attack_count"] = config.attack_count
    dataset = ingest(config.dataset_path, config.dataset_format, config.profiling_count, **layout)
    for key, value in dataset.provenance.items():
        if isinstance(value, dict):
            counts = sorted(set(value.values()))
            value = f"{len(value)} chaves, {counts[0]}..{counts[-1]} traços por chave" if counts else "0 chaves"
        print(f"{key}: {value}")
    if not dataset.profiling.is_complete:
        logger.warning("Conjunto de perfilamento incompleto: %d de %d chaves",
                       len(dataset.profiling.keys), 1 << dataset.B)
    return 0


COMMANDS = {
    "synth": (cmd_synth, "gera um dataset sintético"),
    "design": (cmd_design, "emite Ω_P̂, F* e G"),
    "attack": (cmd_attack, "executa um único esquema"),
    "sweep": (cmd_sweep, "varredura completa"),
    "ingest-check": (cmd_ingest_check, "valida um arquivo de traços"),
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="arn",
        description="Ruído artificial energeticamente eficiente contra ataques de canal lateral de potência.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("-c", "--config", help="arquivo de configuração chave=valor")
        if name == "synth":
            sub.add_argument("--name", default="synthetic", help="nome do arquivo em out_dir")
            sub.add_argument("--format", default="canonical-text", choices=FORMATS[:2])
            sub.add_argument("--n-profiling", type=int, help="traços de perfilamento por chave")
            sub.add_argument("--n-attack", type=int, help="traços de ataque por chave")
        if name == "attack":
            sub.add_argument("--scheme", default="ArN", choices=SCHEME_ORDER)
            sub.add_argument("--save-profile", help="grava W_hat e a covariância do atacante")
        if name in ("attack", "sweep"):
            sub.add_argument("--load-profile", help="usa um perfil gravado com --save-profile no lugar do perfilamento")
        add_config_arguments(sub)
    return parser


def main(argv=None):
    logging.basicConfig(
        level=os.getenv(ENV_PREFIX + "LOG_LEVEL", "INFO").upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        logging.getLogger().setLevel(config.log_level)
        command, _ = COMMANDS[args.command]
        return command(config, args)
    except DomainError as e:
        logger.error("%s", e)
        return 1
    except Exception:
        logger.exception("Erro inesperado")
        return 2


if __name__ == "__main__":
    sys.exit(main())
