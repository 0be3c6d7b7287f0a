from .base import BaseEnsembleGenerator, Ensemble, FidelityTable, draw_distinct, find_collision
from .basis import basis_ensemble, basis_labels
from .circular import circular_ensemble
from .cluster import cluster_ensemble
from .eps_ball import eps_ball_ensemble
from .fidelity_table import from_fidelity_table
from .haar import haar_ensemble
from .hard_pair import hard_instance, hard_pair
