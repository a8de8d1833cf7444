"""Singular-value descent optimizer: linear algebra, models and training harness."""

from ._core import (
    ConfigError,
    IoError,
    Mlp,
    NumericError,
    ParseError,
    ShapeError,
    SvenError,
    dense_svd,
    gen_poly6,
    gen_sine1d,
    natgrad_step,
    option_names,
    param_count,
    pinv,
    randomized_svd,
    selftest,
    sven_step,
    train,
)

__all__ = [
    "ConfigError",
    "IoError",
    "Mlp",
    "NumericError",
    "ParseError",
    "ShapeError",
    "SvenError",
    "dense_svd",
    "gen_poly6",
    "gen_sine1d",
    "natgrad_step",
    "option_names",
    "param_count",
    "pinv",
    "randomized_svd",
    "selftest",
    "sven_step",
    "train",
]
