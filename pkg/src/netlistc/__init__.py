"""Compile structural Verilog netlists to straight-line code and simulate them."""

from .cells import CellError, FlipFlopState, LutSpec, PrimitiveKind, eval_ff, eval_gate, eval_lut
from .compiler import Compiled, compile_design, compile_file, compile_source
from .graph import CombinationalLoop, build_dfg, cycle_removal, tarjan_scc
from .netlist import FlatDesign, NetlistError, elaborate, load_design, parse_netlist
from .schedule import FinalSchedule, SlotMode, asap_schedule, schedule_fixup

__version__ = "0.1.0"
