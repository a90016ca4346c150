from .Exceptions import *
from .VecMath import *
from .Optim import *
from .Policy import *
from .Baselines import *
from .ToyLand import *
from .SynthBench import *
from .Metrics import *
from .Diagnostics import *
from .Trainer import *
from .Utils import *
