from .engine import FlowTrace
