from .game_core import Game, MixedProfile, StrategySpace
from .subspace_engine import decompose
from .classifiers import classify
