from .ablate import ABLATION_AXES, cmd_ablate
from .compare import cmd_compare
from .gen_scene import cmd_gen_scene
from .render import cmd_render

__all__ = [
    "ABLATION_AXES",
    "cmd_ablate",
    "cmd_compare",
    "cmd_gen_scene",
    "cmd_render",
]
