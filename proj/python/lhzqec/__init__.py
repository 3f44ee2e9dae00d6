"""Parity-encoded spin-glass sampling and majority-vote decoding.

Readouts are square int8 matrices with a +1 diagonal; logical states are
lists of +1/-1.
"""

from ._lhzqec import (
    CorruptInput,
    Instance,
    InvalidInput,
    __version__,
    canonical_logical,
    decode_pe,
    decode_series,
    encode_pe,
    gauge_transform,
    generate_instance,
    ground_state,
    is_code_state,
    local_energy,
    logical_energy,
    pe_mvd_iterated,
    pe_mvd_weight2,
    penalty_energy,
    physical_energy,
    qac_mvd,
    repetition_mvd,
    run_spectra,
    run_sweep,
    sample,
    toy_instance,
    toy_validate,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
