from .executor import Branch, EnvMode, ExecutionError, RunReport, run_circuit, schedule, with_loss_placement
from .lexer import ParseError
from .parser import (
    BS,
    PM,
    Circuit,
    Detect,
    FailWhen,
    Homodyne,
    Input,
    Loss,
    OnClick,
    Value,
    format_circuit,
    parse_circuit,
)
