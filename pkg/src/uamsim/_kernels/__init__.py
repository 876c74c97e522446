"""Kernel backend selection: compiled extension when built, else fallback.

Both backends expose ``held_karp`` and ``two_state_chain`` with identical
semantics; ``USING_COMPILED`` records which one was picked at import.
"""

try:
    from uamsim._kernels._core import held_karp, two_state_chain

    USING_COMPILED = True
except ImportError:  # extension not built; pure-Python twin
    from uamsim._kernels.fallback import held_karp, two_state_chain

    USING_COMPILED = False


def backend_name() -> str:
    return "compiled" if USING_COMPILED else "python"


__all__ = ["held_karp", "two_state_chain", "USING_COMPILED", "backend_name"]
