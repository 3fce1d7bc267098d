from .mvm_engine import (
    MvmEngine,
    MvmResult,
    split_signed,
    normalize,
    mvm,
    mvm_oracle,
    build_engine,
    engine_pool,
)
from .gemm import BlockPlan, OracleBackend, AnalogBackend, plan_blocks, gemm

__all__ = [
    'MvmEngine',
    'MvmResult',
    'split_signed',
    'normalize',
    'mvm',
    'mvm_oracle',
    'build_engine',
    'engine_pool',
    'BlockPlan',
    'OracleBackend',
    'AnalogBackend',
    'plan_blocks',
    'gemm',
]
