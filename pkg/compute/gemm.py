"""
GEMM por bloques sobre el tile físico N×N.

A (m×k) y B (k×n) se rellenan con ceros hasta múltiplos de N. La recursión
divide el eje más largo de la rejilla de bloques hasta llegar a tiles
individuales; cada tile (r, q) de A se carga como matriz y las columnas del
bloque (q, c) de B pasan como vectores. Los productos se acumulan en orden
ascendente de q, de modo que el resultado no depende del número de hilos.
"""

import logging
import queue
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from .mvm_engine import MvmEngine, engine_pool
from utils.errors import DomainError, StateError

logger = logging.getLogger(__name__)

# Columnas de B por panel enviado a un motor
PANEL_COLUMNS = 4096

Range = Tuple[int, int]


@dataclass(frozen=True)
class BlockPlan:
    """
    Partición en bloques de (m, k) × (k, n) con tile N.

    Attributes:
        grid: Bloques por eje (filas de A, eje interno, columnas de B)
        padding: Ceros añadidos por eje (m, k, n)
    """
    m: int
    k: int
    n: int
    tile: int
    grid: Tuple[int, int, int]
    padding: Tuple[int, int, int]

    @property
    def padded_shape(self) -> Tuple[int, int, int]:
        return (self.m + self.padding[0], self.k + self.padding[1], self.n + self.padding[2])

    @property
    def tile_count(self) -> int:
        return self.grid[0] * self.grid[1] * self.grid[2]


def plan_blocks(m: int, k: int, n: int, tile: int) -> BlockPlan:
    """Rejilla ceil(m/N) × ceil(k/N) × ceil(n/N) y relleno mínimo."""
    if tile < 1:
        raise DomainError(f"El tamaño de tile debe ser ≥ 1: {tile}")
    if min(m, k, n) < 1:
        raise DomainError(f"Dimensiones no positivas: ({m}, {k}) × ({k}, {n})")
    grid = tuple(-(-d // tile) for d in (m, k, n))
    padding = tuple(g * tile - d for g, d in zip(grid, (m, k, n)))
    return BlockPlan(m=m, k=k, n=n, tile=tile, grid=grid, padding=padding)


class OracleBackend:
    """Aritmética exacta en coma flotante tile a tile."""

    name = 'oracle'

    def __init__(self, tile: int = 8):
        self.tile = tile

    def start_call(self) -> int:
        return 0

    def multiply_panels(self, tasks) -> Dict:
        return {key: a @ b for key, a, b in tasks}


class AnalogBackend:
    """
    Tiles calculados en el array simulado.

    Mantiene un pool de motores idénticos; el ruido de cada panel sale de
    una sub-secuencia con clave (llamada, r, q, c), así que el resultado es
    el mismo con cualquier número de motores.
    """

    name = 'analog'

    def __init__(self, engines: List[MvmEngine]):
        if not engines:
            raise StateError("El backend analógico necesita al menos un motor calibrado")
        self.engines = engines
        self.tile = engines[0].n
        self._calls = 0

    @classmethod
    def from_config(cls, config, calibrated: bool = True, calibration=None,
                    jobs: Optional[int] = None) -> 'AnalogBackend':
        return cls(engine_pool(config, jobs or config.jobs, calibrated, calibration))

    @property
    def calibration(self):
        return self.engines[0].calibration

    def start_call(self) -> int:
        self._calls += 1
        return self._calls

    def multiply_panels(self, tasks) -> Dict:
        free = queue.Queue()
        for engine in self.engines:
            free.put(engine)

        def run(task):
            key, a, b = task
            engine = free.get()
            try:
                rng = engine.array.noise_stream(*key)
                return key, engine.mvm_columns(a, b, rng=rng)
            finally:
                free.put(engine)

        if len(self.engines) == 1:
            return dict(run(task) for task in tasks)
        with ThreadPoolExecutor(max_workers=len(self.engines)) as pool:
            return dict(pool.map(run, tasks))


def _split(r: Range) -> Tuple[Range, Range]:
    mid = (r[0] + r[1]) // 2
    return (r[0], mid), (mid, r[1])


def _leaf_blocks(rows: Range, inner: Range, cols: Range, panel: int) -> Iterator[Tuple[int, int, Range]]:
    """
    Divide y vencerás sobre la rejilla: parte el eje más largo hasta que
    quedan un tile de A y un panel de columnas de B.
    """
    sizes = (rows[1] - rows[0], inner[1] - inner[0], -(-(cols[1] - cols[0]) // panel))
    if max(sizes) <= 1:
        yield rows[0], inner[0], cols
        return
    axis = int(np.argmax(sizes))
    if axis == 0:
        for half in _split(rows):
            yield from _leaf_blocks(half, inner, cols, panel)
    elif axis == 1:
        for half in _split(inner):
            yield from _leaf_blocks(rows, half, cols, panel)
    else:
        mid = cols[0] + panel * (sizes[2] // 2)
        yield from _leaf_blocks(rows, inner, (cols[0], mid), panel)
        yield from _leaf_blocks(rows, inner, (mid, cols[1]), panel)


def _check_operands(A, B) -> Tuple[np.ndarray, np.ndarray]:
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[0]:
        raise DomainError(f"Dimensiones incompatibles: A{A.shape} · B{B.shape}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
        raise DomainError("Operandos con valores no finitos")
    return A, B


def gemm(A, B, backend) -> np.ndarray:
    """
    C = A·B por bloques con el backend dado.

    Args:
        A: Matriz m×k
        B: Matriz k×n
        backend: OracleBackend o AnalogBackend

    Returns:
        C con forma (m, n)

    Raises:
        DomainError: Dimensiones internas distintas
    """
    A, B = _check_operands(A, B)
    m, k = A.shape
    n = B.shape[1]
    N = backend.tile
    plan = plan_blocks(m, k, n, N)
    pm, pk, pn = plan.padded_shape
    A_pad = np.zeros((pm, pk))
    A_pad[:m, :k] = A
    B_pad = np.zeros((pk, pn))
    B_pad[:k, :n] = B

    call = backend.start_call()
    panel_tiles = max(1, PANEL_COLUMNS // N)
    leaves = list(_leaf_blocks((0, plan.grid[0]), (0, plan.grid[1]), (0, plan.grid[2]), panel_tiles))
    tasks = []
    for r, q, (c0, c1) in leaves:
        a_tile = A_pad[r * N:(r + 1) * N, q * N:(q + 1) * N]
        b_panel = B_pad[q * N:(q + 1) * N, c0 * N:c1 * N]
        tasks.append(((call, r, q, c0), a_tile, b_panel))
    products = backend.multiply_panels(tasks)

    C_pad = np.zeros((pm, pn))
    panels = sorted({cols for _, _, cols in leaves})
    for r in range(plan.grid[0]):
        for c0, c1 in panels:
            block = C_pad[r * N:(r + 1) * N, c0 * N:c1 * N]
            for q in range(plan.grid[1]):
                block += products[(call, r, q, c0)]
    logger.debug(f"GEMM {m}×{k}·{k}×{n} con {backend.name}: {plan.tile_count} tiles")
    return C_pad[:m, :n]
