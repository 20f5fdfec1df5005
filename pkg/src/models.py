"""
Modelos Pydantic do cenário (arquivo YAML) e conversão para os tipos numéricos.

Um cenário descreve a planta (quadrotor paramétrico ou matrizes explícitas),
os pesos LQG, os períodos de amostragem, o orçamento μ do watermark, o
detector, o ataque de replay opcional e a simulação.
"""
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .control import CostWeights
from .exceptions import ConfigurationError
from .plant import ContinuousPlant, QuadrotorParams, default_noise_densities, quadrotor_hover_plant
from .simulation import DetectorConfig, ReplayAttack

Matrix = List[List[float]]


def _check_rectangular(value: Optional[Matrix], name: str) -> Optional[Matrix]:
    if value is None:
        return value
    if not value or any(len(row) != len(value[0]) for row in value) or not value[0]:
        raise ValueError(f"{name} deve ser uma matriz retangular não vazia (lista de linhas)")
    return value


# =============================================================================
# PLANTA
# =============================================================================

class QuadrotorSection(BaseModel):
    """Parâmetros físicos do quadrotor + densidades de ruído (padrões documentados)."""

    model_config = ConfigDict(extra='forbid')

    mass: float = Field(0.6, gt=0, description="Massa [kg]")
    J_x: float = Field(0.0092, gt=0)
    J_y: float = Field(0.0092, gt=0)
    J_z: float = Field(0.0101, gt=0)
    gravity: float = Field(9.81, gt=0)
    Q: Optional[Matrix] = Field(None, description="Densidade do ruído de processo 12x12")
    R: Optional[Matrix] = Field(None, description="Densidade do ruído de medição 4x4")

    @field_validator('Q', 'R')
    @classmethod
    def validate_matrix(cls, v, info):
        return _check_rectangular(v, info.field_name)

    def build(self) -> ContinuousPlant:
        params = QuadrotorParams(
            mass=self.mass, J_x=self.J_x, J_y=self.J_y, J_z=self.J_z, gravity=self.gravity
        )
        Q_default, R_default = default_noise_densities()
        return quadrotor_hover_plant(
            params,
            Q=Q_default if self.Q is None else self.Q,
            R=R_default if self.R is None else self.R,
        )


class MatrixPlantSection(BaseModel):
    """Planta explícita: matrizes em listas de linhas."""

    model_config = ConfigDict(extra='forbid')

    A: Matrix
    B: Matrix
    C: Matrix
    Q: Matrix
    R: Matrix

    @field_validator('A', 'B', 'C', 'Q', 'R')
    @classmethod
    def validate_matrix(cls, v, info):
        return _check_rectangular(v, info.field_name)

    def build(self) -> ContinuousPlant:
        return ContinuousPlant.from_dict(self.model_dump())


class PlantSection(BaseModel):
    """Exatamente uma das formas: `quadrotor` ou `matrices`."""

    model_config = ConfigDict(extra='forbid')

    quadrotor: Optional[QuadrotorSection] = None
    matrices: Optional[MatrixPlantSection] = None

    @model_validator(mode='after')
    def exactly_one_form(self):
        if (self.quadrotor is None) == (self.matrices is None):
            raise ValueError("plant: informe exatamente uma das formas (quadrotor ou matrices)")
        return self

    def build(self) -> ContinuousPlant:
        if self.quadrotor is not None:
            return self.quadrotor.build()
        return self.matrices.build()


# =============================================================================
# PESOS, AMOSTRAGEM, WATERMARK, DETECTOR
# =============================================================================

class WeightsSection(BaseModel):
    """Pesos por amostra; ausentes viram identidade."""

    model_config = ConfigDict(extra='forbid')

    W: Optional[Matrix] = None
    U: Optional[Matrix] = None

    @field_validator('W', 'U')
    @classmethod
    def validate_matrix(cls, v, info):
        return _check_rectangular(v, info.field_name)

    def build(self, n: int, p: int) -> CostWeights:
        W = np.eye(n) if self.W is None else self.W
        U = np.eye(p) if self.U is None else self.U
        return CostWeights(W=W, U=U)


class SamplingSection(BaseModel):
    """Período único e/ou grade, limitados por T̄."""

    model_config = ConfigDict(extra='forbid')

    period: Optional[float] = Field(None, description="T para design/simulate")
    grid: Optional[List[float]] = Field(None, description="Grade de T para sweep/roc/table")
    upper_bound: float = Field(..., gt=0, description="T̄")
    reference_period: Optional[float] = Field(None, description="T de referência da tabela de custos")

    @model_validator(mode='after')
    def validate_periods(self):
        if self.period is None and not self.grid:
            raise ValueError("sampling: informe period ou grid")
        values = list(self.grid or [])
        if self.period is not None:
            values.append(self.period)
        for T in values:
            if not (0.0 < T <= self.upper_bound):
                raise ValueError(f"sampling: T={T} fora de (0, {self.upper_bound}]")
        if self.reference_period is not None:
            if not self.grid or not any(np.isclose(T, self.reference_period, rtol=1e-12, atol=0.0) for T in self.grid):
                raise ValueError("sampling.reference_period deve pertencer a sampling.grid")
        return self

    def periods(self) -> List[float]:
        """Grade, ou o período único quando não há grade."""
        return list(self.grid) if self.grid else [self.period]

    def single_period(self) -> float:
        if self.period is not None:
            return self.period
        if self.grid and len(self.grid) == 1:
            return self.grid[0]
        raise ConfigurationError("comando requer sampling.period", field="sampling.period")


class WatermarkSection(BaseModel):
    model_config = ConfigDict(extra='forbid')

    budget_mu: float = Field(..., gt=0, description="Aumento máximo do custo LQG")


class DetectorSection(BaseModel):
    model_config = ConfigDict(extra='forbid')

    window: int = Field(10, ge=1, description="𝒯")
    alpha: float = Field(0.05, gt=0, lt=1, description="Probabilidade de falso alarme")

    def build(self, m: int) -> DetectorConfig:
        return DetectorConfig.build(m, self.window, self.alpha)


class AttackSection(BaseModel):
    model_config = ConfigDict(extra='forbid')

    record_start: int = Field(..., ge=0)
    record_len: int = Field(..., ge=1)
    replay_start: int = Field(..., ge=0)

    @model_validator(mode='after')
    def replay_after_record(self):
        if self.replay_start < self.record_start + self.record_len:
            raise ValueError("attack.replay_start deve ser >= record_start + record_len")
        return self

    def build(self) -> ReplayAttack:
        return ReplayAttack(
            record_start=self.record_start,
            record_len=self.record_len,
            replay_start=self.replay_start,
        )


class SimulationSection(BaseModel):
    model_config = ConfigDict(extra='forbid')

    horizon: int = Field(..., ge=1)
    trials: int = Field(100, ge=1)
    seed: int = 0
    settle: Optional[int] = Field(None, ge=0, description="Assentamento após replay_start (padrão 𝒯)")


# =============================================================================
# CENÁRIO
# =============================================================================

class ScenarioConfig(BaseModel):
    """Cenário completo lido de um arquivo YAML."""

    model_config = ConfigDict(extra='forbid')

    name: str = "scenario"
    plant: PlantSection
    weights: WeightsSection = Field(default_factory=WeightsSection)
    sampling: SamplingSection
    watermark: WatermarkSection
    detector: DetectorSection = Field(default_factory=DetectorSection)
    attack: Optional[AttackSection] = None
    simulation: SimulationSection
    output_dir: str = "output"

    @model_validator(mode='after')
    def attack_fits_simulation(self):
        if self.attack is not None:
            if self.attack.record_len < self.detector.window:
                raise ValueError("attack.record_len deve ser >= detector.window")
            if self.simulation.horizon <= self.attack.replay_start + self.detector.window:
                raise ValueError("simulation.horizon deve exceder attack.replay_start + detector.window")
        return self

    # -------------------------------------------------------------------------
    # Leitura / escrita
    # -------------------------------------------------------------------------

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ScenarioConfig":
        """
        Valida um dicionário.

        Raises:
            ConfigurationError: nomeando o campo inválido
        """
        if not isinstance(data, dict):
            raise ConfigurationError("cenário deve ser um mapeamento YAML")
        try:
            return cls.model_validate(data)
        except ValidationError as exc:
            first = exc.errors()[0]
            field = ".".join(str(part) for part in first['loc']) or None
            raise ConfigurationError(first["msg"], field=field) from exc

    @classmethod
    def from_yaml(cls, path: Union[str, Path]) -> "ScenarioConfig":
        config_file = Path(path)
        if not config_file.exists():
            raise ConfigurationError(f"Config não encontrado: {path}", field="--config")
        try:
            with open(config_file, 'r', encoding='utf-8') as f:
                data = yaml.safe_load(f)
        except yaml.YAMLError as exc:
            raise ConfigurationError(f"YAML inválido em {path}: {exc}") from exc
        return cls.from_dict(data)

    def to_yaml(self, path: Optional[Union[str, Path]] = None) -> str:
        """Serializa (campos nulos omitidos); `from_yaml` devolve um cenário igual."""
        text = yaml.safe_dump(
            self.model_dump(mode='json', exclude_none=True),
            sort_keys=False,
            allow_unicode=True,
        )
        if path is not None:
            Path(path).write_text(text, encoding='utf-8')
        return text

    def with_overrides(
        self,
        seed: Optional[int] = None,
        trials: Optional[int] = None,
        output_dir: Optional[str] = None,
    ) -> "ScenarioConfig":
        """Aplica as flags da linha de comando, revalidando o resultado."""
        data = self.model_dump(mode='json', exclude_none=True)
        if seed is not None:
            data['simulation']['seed'] = seed
        if trials is not None:
            data['simulation']['trials'] = trials
        if output_dir is not None:
            data['output_dir'] = output_dir
        return type(self).from_dict(data)

    # -------------------------------------------------------------------------
    # Construção dos objetos numéricos
    # -------------------------------------------------------------------------

    def build_plant(self) -> ContinuousPlant:
        """Matrizes inválidas (forma, simetria, R não PD) viram erro de validação."""
        try:
            return self.plant.build()
        except ValueError as exc:
            raise ConfigurationError(str(exc), field="plant") from exc

    def build_weights(self, plant: ContinuousPlant) -> CostWeights:
        try:
            weights = self.weights.build(plant.n, plant.p)
            weights.check_against(plant.n, plant.p)
        except ValueError as exc:
            raise ConfigurationError(str(exc), field="weights") from exc
        return weights

    def build_detector(self, m: int) -> DetectorConfig:
        return self.detector.build(m)

    def build_attack(self) -> Optional[ReplayAttack]:
        return self.attack.build() if self.attack is not None else None
