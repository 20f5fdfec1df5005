#!/usr/bin/env python3
"""
Linha de comando do toolkit de watermarking físico contra ataques de replay.

Uso:
    python scripts/watermark_cli.py <comando> --config CONFIG [OPTIONS]

Comandos:
    design      𝒬 ótima num período fixo               → design.csv
    sweep       E[Δg_k] ao longo da grade de T          → delta_g_vs_T.csv
    simulate    uma trajetória com detector e ataque    → gk_trace.csv
    roc         curvas ROC por período                  → roc_T<T>.csv, auc_summary.csv
    table       razões de custo J_T / J_ref             → cost_ratios.csv

Options:
    --config PATH       Cenário YAML (obrigatório)
    --out DIR           Diretório de saída (sobrepõe output_dir)
    --seed INT          Semente (sobrepõe simulation.seed)
    --trials INT        Número de trials (sobrepõe simulation.trials)
    --refine            Refino por seção áurea do melhor T (sweep)
    --monte-carlo       Confere a tabela de custos por simulação (table)
    --log-level LEVEL   Nível do log no terminal

Saída: 0 sucesso, 1 erro de validação, 2 falha numérica; a última linha em
stderr é sempre `status=<ok|error> command=<nome> code=<n> message="..."`.
"""

import argparse
import os
import sys
from typing import Any, Dict, List, Optional

# Adiciona o diretório raiz ao path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pandas as pd
from loguru import logger

from src.control import classify_A_script, synthesize
from src.exceptions import ConfigurationError, StabilityError, WatermarkingError
from src.export import ExportManager, design_to_frame
from src.models import ScenarioConfig
from src.plant import discretize
from src.runtime import get_runtime_config
from src.simulation import (
    COST_TABLE_COLUMNS,
    cost_ratio_table,
    derive_seed,
    roc_curve,
    simulate,
)
from src.watermark import (
    STATUS_OK,
    STATUS_UNNECESSARY,
    optimize_watermark_fixed_T,
    sweep_sampling_period,
    zero_watermark,
)

COMMANDS = ('design', 'sweep', 'simulate', 'roc', 'table')
SWEEP_COLUMNS = [
    'T', 'expected_shift', 'cost_increase', 'nominal_cost',
    'spectral_radius', 'status', 'is_argmax', 'is_refinement',
]
AUC_COLUMNS = [
    'T', 'auc', 'auc_std_error', 'baseline_auc', 'baseline_auc_std_error',
    'expected_shift', 'status',
]


def setup_logging(level: str = "INFO"):
    """Configura logging para o script."""
    logger.remove()
    logger.add(
        sys.stderr,
        format="<green>{time:HH:mm:ss}</green> | <level>{level: <8}</level> | {message}",
        level=level,
    )
    logger.add(
        "logs/watermark_{time:YYYY-MM-DD}.log",
        format="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {message}",
        level="DEBUG",
        rotation="1 day",
    )


def print_banner():
    """Imprime banner do sistema."""
    print("""
╔═══════════════════════════════════════════════════════════════╗
║                                                               ║
║   🛡️  REPLAY WATERMARK - PROJETO E VALIDAÇÃO                   ║
║   Watermarking físico e período de amostragem                 ║
║                                                               ║
╚═══════════════════════════════════════════════════════════════╝
    """)


class _ArgumentParser(argparse.ArgumentParser):
    """Erros de uso viram ConfigurationError (código 1)."""

    def error(self, message):
        raise ConfigurationError(message, field="argv")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, required=True, help="Cenário YAML")
    common.add_argument("--out", type=str, default=None, help="Diretório de saída")
    common.add_argument("--seed", type=int, default=None, help="Semente (sobrepõe o cenário)")
    common.add_argument("--trials", type=int, default=None, help="Número de trials")
    common.add_argument("--refine", action="store_true", help="Refino por seção áurea do melhor T")
    common.add_argument("--monte-carlo", action="store_true", help="Conferência Monte Carlo da tabela")
    common.add_argument("--log-level", type=str, default=None, help="DEBUG, INFO, WARNING...")

    parser = _ArgumentParser(description="Watermarking físico contra ataques de replay")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)
    helps = {
        'design': "𝒬 ótima num período fixo",
        'sweep': "E[Δg_k] ao longo da grade de T",
        'simulate': "Trajetória com detector χ² e ataque opcional",
        'roc': "Curvas ROC por período",
        'table': "Razões de custo J_T / J_ref",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


# =============================================================================
# COMANDOS
# =============================================================================

def cmd_design(config: ScenarioConfig, manager: ExportManager, args) -> Dict[str, Any]:
    """design.csv: 𝒬, 𝒰, E[Δg_k], ΔJ, ρ(𝒜), K e L."""
    cont = config.build_plant()
    weights = config.build_weights(cont)
    T = config.sampling.single_period()

    plant = discretize(cont, T)
    design = synthesize(plant, weights)
    verdict = classify_A_script(design)
    wm = optimize_watermark_fixed_T(plant, design, weights, config.watermark.budget_mu, config.detector.window)

    manager.write_frame(design_to_frame(design, wm, verdict), "design.csv")
    return {
        'T': T,
        'budget_mu': config.watermark.budget_mu,
        'expected_shift': wm.expected_shift,
        'cost_increase': wm.cost_increase,
        'nominal_cost': design.nominal_cost,
        'spectral_radius': verdict.spectral_radius,
        'watermark_rank': int(np.linalg.matrix_rank(wm.cov_Q)) if not wm.is_zero else 0,
    }


def cmd_sweep(config: ScenarioConfig, manager: ExportManager, args) -> Dict[str, Any]:
    """delta_g_vs_T.csv: uma linha por T, melhor T marcado."""
    cont = config.build_plant()
    weights = config.build_weights(cont)
    result = sweep_sampling_period(
        cont,
        weights,
        config.sampling.periods(),
        config.sampling.upper_bound,
        config.watermark.budget_mu,
        window=config.detector.window,
        refine=args.refine,
    )
    manager.write_frame(result.to_frame(), "delta_g_vs_T.csv", columns=SWEEP_COLUMNS)
    best = result.best_row
    return {
        'argmax_T': result.argmax_T,
        'best_expected_shift': best.expected_shift if best else None,
        'budget_mu': config.watermark.budget_mu,
        'rows': len(result.rows),
        'failed_rows': sum(1 for row in result.rows if row.status.startswith("failed")),
        'refined': bool(args.refine),
    }


def _design_for_period(config: ScenarioConfig, cont, weights, T: float):
    """Planta, projeto LQG e watermark ótimo (ou nulo se 𝒜 instável)."""
    plant = discretize(cont, T)
    design = synthesize(plant, weights)
    try:
        wm = optimize_watermark_fixed_T(
            plant, design, weights, config.watermark.budget_mu, config.detector.window
        )
        status = STATUS_OK
    except StabilityError:
        logger.warning(f"T={T:g}: 𝒜 instável, simulando sem watermark")
        wm = zero_watermark(plant, design, weights, config.detector.window)
        status = STATUS_UNNECESSARY
    return plant, design, wm, status


def cmd_simulate(config: ScenarioConfig, manager: ExportManager, args) -> Dict[str, Any]:
    """gk_trace.csv de uma trajetória (trial 0)."""
    cont = config.build_plant()
    weights = config.build_weights(cont)
    T = config.sampling.single_period()
    plant, design, wm, status = _design_for_period(config, cont, weights, T)

    detector = config.build_detector(plant.m)
    attack = config.build_attack()
    trace = simulate(
        plant, design, wm, detector, attack,
        config.simulation.horizon,
        derive_seed(config.simulation.seed, "simulate"),
    )
    manager.write_frame(trace.to_frame(), "gk_trace.csv")

    valid = ~trace.warmup
    before = valid & ~trace.attack_active
    during = valid & trace.attack_active
    summary = {
        'T': T,
        'status': status,
        'threshold': detector.threshold,
        'dof': detector.dof,
        'expected_shift': wm.expected_shift,
        'mean_g_no_attack': float(trace.g[before].mean()) if before.any() else None,
        'alarm_rate_no_attack': float(trace.alarms[before].mean()) if before.any() else None,
        'mean_g_attack': float(trace.g[during].mean()) if during.any() else None,
        'alarm_rate_attack': float(trace.alarms[during].mean()) if during.any() else None,
    }
    if trace.zeta is not None:
        summary['zeta_norm'] = float(np.linalg.norm(trace.zeta))
    return summary


def cmd_roc(config: ScenarioConfig, manager: ExportManager, args) -> Dict[str, Any]:
    """Um roc_T<T>.csv por período e auc_summary.csv (com a linha de base 𝒬 = 0)."""
    attack = config.build_attack()
    if attack is None:
        raise ConfigurationError("roc requer o bloco attack", field="attack")
    cont = config.build_plant()
    weights = config.build_weights(cont)
    sim = config.simulation
    seed = derive_seed(sim.seed, "roc")

    rows: List[Dict[str, Any]] = []
    for T in config.sampling.periods():
        row = {column: None for column in AUC_COLUMNS}
        row['T'] = T
        try:
            plant, design, wm, status = _design_for_period(config, cont, weights, T)
            curve = roc_curve(
                plant, design, wm, config.detector.window, attack,
                sim.horizon, sim.trials, seed, settle=sim.settle,
            )
            baseline = roc_curve(
                plant, design, zero_watermark(plant, design, weights, config.detector.window),
                config.detector.window, attack, sim.horizon, sim.trials, seed, settle=sim.settle,
            )
        except ConfigurationError:
            raise
        except WatermarkingError as exc:
            logger.warning(f"T={T:g}: ROC falhou ({exc})")
            row['status'] = f"failed: {exc}"
            rows.append(row)
            continue

        manager.write_frame(curve.to_frame(), f"roc_T{T:g}.csv")
        row.update({
            'auc': curve.auc,
            'auc_std_error': curve.auc_std_error,
            'baseline_auc': baseline.auc,
            'baseline_auc_std_error': baseline.auc_std_error,
            'expected_shift': wm.expected_shift,
            'status': status,
        })
        logger.info(f"T={T:g}: AUC={curve.auc:.4f} (linha de base {baseline.auc:.4f})")
        rows.append(row)

    manager.write_frame(pd.DataFrame.from_records(rows, columns=AUC_COLUMNS), "auc_summary.csv")
    ok_rows = [row for row in rows if row['auc'] is not None]
    best = max(ok_rows, key=lambda row: row['auc']) if ok_rows else None
    return {
        'periods': len(rows),
        'best_auc_T': best['T'] if best else None,
        'best_auc': best['auc'] if best else None,
        'trials': sim.trials,
    }


def cmd_table(config: ScenarioConfig, manager: ExportManager, args) -> Dict[str, Any]:
    """cost_ratios.csv: J_T / J_ref na grade."""
    cont = config.build_plant()
    weights = config.build_weights(cont)
    periods = config.sampling.periods()
    reference = config.sampling.reference_period or periods[0]
    sim = config.simulation

    df = cost_ratio_table(
        cont, weights, periods, reference, config.watermark.budget_mu,
        horizon=sim.horizon, trials=sim.trials, seed=sim.seed,
        monte_carlo=args.monte_carlo, window=config.detector.window,
    )
    manager.write_frame(df, "cost_ratios.csv", columns=COST_TABLE_COLUMNS)
    return {
        'reference_T': reference,
        'rows': len(df),
        'monte_carlo': bool(args.monte_carlo),
        'max_ratio': float(df['ratio'].max()),
    }


HANDLERS = {
    'design': cmd_design,
    'sweep': cmd_sweep,
    'simulate': cmd_simulate,
    'roc': cmd_roc,
    'table': cmd_table,
}


# =============================================================================
# MAIN
# =============================================================================

def _final_record(status: str, command: str, code: int, message: str):
    message = " ".join(str(message).split()).replace('"', "'")
    print(f'status={status} command={command} code={code} message="{message}"', file=sys.stderr)


def main(argv: Optional[List[str]] = None) -> int:
    """Função principal do script."""
    command = "unknown"
    try:
        args = build_parser().parse_args(argv)
        command = args.command
        setup_logging((args.log_level or get_runtime_config().log_level).upper())
        print_banner()

        config = ScenarioConfig.from_yaml(args.config).with_overrides(
            seed=args.seed, trials=args.trials, output_dir=args.out,
        )
        logger.info(f"Cenário '{config.name}' carregado de {args.config}")

        manager = ExportManager(config.output_dir)
        summary = HANDLERS[command](config, manager, args)
        summary['command'] = command
        summary['scenario'] = config.name
        summary['seed'] = config.simulation.seed
        manager.write_summary(command, summary)
        manager.print_summary_report(f"RESUMO: {command}", summary)

        _final_record("ok", command, 0, f"{manager.stats.files_written} arquivos em {config.output_dir}")
        return 0

    except WatermarkingError as e:
        logger.error(f"{type(e).__name__}: {e}")
        _final_record("error", command, e.exit_code, e)
        return e.exit_code
    except Exception as e:
        logger.exception(f"Erro inesperado: {e}")
        _final_record("error", command, 2, e)
        return 2


if __name__ == "__main__":
    sys.exit(main())
