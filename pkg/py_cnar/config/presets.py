"""Simulation presets for the five benchmark examples.

Examples 1 and 3 draw planted-partition block models; Example 2 forges a graph
with a block-like spectrum; Examples 4 and 5 use clustered power-law and random
partition graphs. Example 3 generates data from the NAR model instead of CNAR.
"""

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from ..exceptions import CnarValidationError

EXAMPLE_GAMMA: tuple[float, ...] = (-0.1, 0.2, -0.3, 0.0, 0.0)


class ExamplePreset(BaseModel):
    """Immutable parameter set for one benchmark example."""

    model_config = ConfigDict(frozen=True)

    id: int = Field(..., ge=1, le=5)
    title: str
    generator: Literal["sbm", "spectral_forge", "powerlaw_cluster", "random_partition"]
    dgp: Literal["cnar", "nar"] = "cnar"
    n: int = 400
    k: int = 2
    t_len: int = 200
    alpha_n: float = 0.9
    rho: float = 8 / 9
    beta1: float = 0.5
    beta2: float = 0.3
    gamma: tuple[float, ...] = EXAMPLE_GAMMA
    m: int = 3
    sigma_e: float = 1.0
    grid_n: tuple[int, ...] = (400,)
    grid_t: tuple[int, ...] = (200,)
    grid_k: tuple[int, ...] = (2,)


PRESETS: dict[int, ExamplePreset] = {
    1: ExamplePreset(
        id=1,
        title="Stochastic block model and CNAR",
        generator="sbm",
        n=200,
        grid_n=(200, 400, 800),
        grid_t=(100, 200, 400),
    ),
    2: ExamplePreset(id=2, title="Low-rank spectral network and CNAR", generator="spectral_forge"),
    3: ExamplePreset(id=3, title="Stochastic block model and NAR", generator="sbm", dgp="nar"),
    4: ExamplePreset(
        id=4, title="Clusters of power-law graphs and CNAR", generator="powerlaw_cluster"
    ),
    5: ExamplePreset(id=5, title="Random partition graph and CNAR", generator="random_partition"),
}


def get_preset(example_id: int) -> ExamplePreset:
    """Look up an example preset by its id (1..5)."""
    preset = PRESETS.get(example_id)
    if preset is None:
        raise CnarValidationError(
            f"Unknown example '{example_id}'. Available examples: "
            f"{', '.join(str(i) for i in sorted(PRESETS))}"
        )
    return preset


def list_presets() -> list[ExamplePreset]:
    return [PRESETS[i] for i in sorted(PRESETS)]
