#!/usr/bin/env python3
"""
Export Manager - Emissão dos resultados em CSV e resumos JSON.

Funcionalidades:
1. Tabelas com ordem de colunas fixa e formato numérico independente de locale
2. Escrita atômica (arquivo temporário no diretório de destino + os.replace)
3. Resumo `summary_<comando>.json` com chaves ordenadas
4. Relatório final no terminal
"""

import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from loguru import logger

from ..control import ClosedLoopDesign, StabilityVerdict
from ..watermark import WatermarkDesign

FLOAT_FORMAT = "%.12g"
DESIGN_COLUMNS = ['quantity', 'row', 'col', 'value']


@dataclass
class ExportStats:
    """Estatísticas da exportação."""
    files_written: int = 0
    rows_written: int = 0
    paths: List[str] = field(default_factory=list)


# =============================================================================
# CONVERSÕES
# =============================================================================

def _plain(value: Any) -> Any:
    """Tipos numpy → tipos JSON; NaN/inf → null."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def design_to_frame(
    design: ClosedLoopDesign,
    wm: WatermarkDesign,
    verdict: StabilityVerdict,
) -> pd.DataFrame:
    """
    design.csv em formato longo: uma linha por entrada de matriz ou escalar.

    Escalares usam row = col = 0.
    """
    records = []

    def add_matrix(name: str, matrix: np.ndarray):
        for (i, j), value in np.ndenumerate(np.atleast_2d(matrix)):
            records.append({'quantity': name, 'row': i, 'col': j, 'value': float(value)})

    add_matrix('cov_Q', wm.cov_Q)
    add_matrix('steady_U', wm.steady_U)
    for name, value in (
        ('expected_shift', wm.expected_shift),
        ('cost_increase', wm.cost_increase),
        ('nominal_cost', design.nominal_cost),
        ('spectral_radius', verdict.spectral_radius),
        ('window', wm.window),
    ):
        records.append({'quantity': name, 'row': 0, 'col': 0, 'value': float(value)})
    add_matrix('K', design.K)
    add_matrix('L', design.L)
    return pd.DataFrame.from_records(records, columns=DESIGN_COLUMNS)


# =============================================================================
# EXPORT MANAGER
# =============================================================================

class ExportManager:
    """
    Gravação dos artefatos de um comando em `output_dir`.

    Todas as escritas passam por um temporário no mesmo diretório e são
    publicadas com os.replace, então um leitor nunca vê arquivo parcial.
    """

    def __init__(self, output_dir: Union[str, Path]):
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.stats = ExportStats()
        logger.debug(f"ExportManager inicializado em {self.output_dir}")

    def _atomic_write(self, filename: str, text: str) -> Path:
        target = self.output_dir / filename
        fd, tmp_path = tempfile.mkstemp(dir=self.output_dir, prefix=f".{filename}.", suffix=".tmp")
        try:
            with os.fdopen(fd, 'w', encoding='utf-8', newline='') as f:
                f.write(text)
            os.replace(tmp_path, target)
        except BaseException:
            if os.path.exists(tmp_path):
                os.unlink(tmp_path)
            raise
        self.stats.files_written += 1
        self.stats.paths.append(str(target))
        return target

    def write_frame(
        self,
        df: pd.DataFrame,
        filename: str,
        columns: Optional[Sequence[str]] = None,
    ) -> Path:
        """CSV com cabeçalho, colunas na ordem dada e floats em %.12g."""
        if columns is not None:
            df = df.loc[:, list(columns)]
        text = df.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        path = self._atomic_write(filename, text)
        self.stats.rows_written += len(df)
        logger.info(f"📄 {path} ({len(df)} linhas)")
        return path

    def write_summary(self, command: str, summary: Dict[str, Any]) -> Path:
        """summary_<comando>.json com chaves ordenadas."""
        text = json.dumps(_plain(summary), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
        return self._atomic_write(f"summary_{command}.json", text)

    def write_text(self, filename: str, text: str) -> Path:
        return self._atomic_write(filename, text)

    def print_summary_report(self, title: str, lines: Dict[str, Any]):
        """Imprime relatório de resumo do comando."""
        print("\n" + "=" * 60)
        print(f"  📊 {title}")
        print("=" * 60)
        for key, value in lines.items():
            if isinstance(value, float):
                value = f"{value:.6g}"
            print(f"     {key}: {value}")
        print(f"\n     Arquivos gravados: {self.stats.files_written}")
        print(f"     Linhas gravadas: {self.stats.rows_written}")
        print("=" * 60)
