from .calibrate import cmd_calibrate
from .mvm import cmd_mvm
from .gemm import cmd_gemm
from .sweep import cmd_error_sweep
from .demos import cmd_demo, cmd_demo_svd, cmd_demo_blobs, cmd_demo_mlp

__all__ = [
    'cmd_calibrate',
    'cmd_mvm',
    'cmd_gemm',
    'cmd_error_sweep',
    'cmd_demo',
    'cmd_demo_svd',
    'cmd_demo_blobs',
    'cmd_demo_mlp',
]
