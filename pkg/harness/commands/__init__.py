from .optimize import cmd_optimize
from .simulate import cmd_schedule, cmd_simulate, cmd_sweep, cmd_wigner
from .studies import cmd_requirements, cmd_scaling, cmd_spectrum

__all__ = ['cmd_optimize', 'cmd_schedule', 'cmd_simulate', 'cmd_wigner', 'cmd_sweep',
           'cmd_scaling', 'cmd_requirements', 'cmd_spectrum']
