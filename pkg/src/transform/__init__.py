from .normalize import SplitMode, normalize
from .partitions import split_constant_partitions
from .strengthen import established_to_erestricted
