"""Zero-coupon catastrophe bond pricing under shot-noise aggregate losses
and a CIR short rate, with Monte Carlo oracles."""
from .contracts import CatBondContract
from .loss_process import LossPath, ShotNoiseSpec
from .model2 import Model2State, pre_trigger_price, price_at_zero, survival_c
from .rates import CirParams, bond_price
from .severity import Exponential, LogNormal, Pareto

__all__ = ["CatBondContract", "LossPath", "ShotNoiseSpec", "Model2State", "pre_trigger_price",
           "price_at_zero", "survival_c", "CirParams", "bond_price", "Exponential", "LogNormal", "Pareto"]
__version__ = "0.1.0"
