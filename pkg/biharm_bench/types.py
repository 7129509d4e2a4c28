from typing import Callable, Dict, Sequence, Tuple, TypeAlias

import numpy as np

MultiIndex: TypeAlias = Tuple[int, ...]
ChartPoint: TypeAlias = Tuple[float, ...]
# Chart coordinates (floats or jets) to embedding coordinates (floats or jets).
ComponentMap: TypeAlias = Callable[[Sequence], Sequence]
ScalarMap: TypeAlias = Callable[[Sequence], object]
ResidualMap: TypeAlias = Dict[str, float]
AmbientArray: TypeAlias = np.ndarray
# (grid index, per-point result) as pushed by sweep workers.
IndexedRecord: TypeAlias = Tuple[int, object]
