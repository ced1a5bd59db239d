"""Parameterized models, datasets, residuals, and Jacobians."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyInput,
    InvalidArguments,
    NoEvaluator,
    NonFiniteValue,
)

# Forward-difference base step; scaled by max(1, |p_l|) per coordinate.
FD_STEP = 1e-6

# Serialization cost model: 64 bits per parameter plus a fixed header.
BITS_PER_PARAM = 64
HEADER_BITS = 128


@dataclass
class Dataset:
    """n samples of m input attributes paired with k response attributes."""

    inputs: np.ndarray
    responses: np.ndarray

    def __post_init__(self):
        self.inputs = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        responses = np.asarray(self.responses, dtype=float)
        if responses.ndim == 1:
            responses = responses[:, None]
        self.responses = responses
        if self.inputs.ndim != 2 or self.responses.ndim != 2:
            raise DimensionMismatch("inputs and responses must be 2-D")
        if self.inputs.shape[0] != self.responses.shape[0]:
            raise DimensionMismatch(
                f"{self.inputs.shape[0]} input rows vs {self.responses.shape[0]} response rows"
            )
        if self.inputs.shape[0] == 0:
            raise EmptyInput("dataset needs at least one sample")

    @property
    def n(self) -> int:
        return self.inputs.shape[0]

    @property
    def input_dim(self) -> int:
        return self.inputs.shape[1]

    @property
    def output_dim(self) -> int:
        return self.responses.shape[1]

    def to_csv(self, path) -> None:
        """Write header x1..xm,y1..yk and one row per sample.

        Floats are emitted as shortest round-trip decimals, so a write/read
        cycle reproduces the arrays exactly.
        """
        header = [f"x{i + 1}" for i in range(self.input_dim)]
        header += [f"y{j + 1}" for j in range(self.output_dim)]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for xi, yi in zip(self.inputs, self.responses):
                writer.writerow([repr(float(v)) for v in xi] + [repr(float(v)) for v in yi])

    @classmethod
    def from_csv(cls, path) -> "Dataset":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise EmptyInput(f"{path} is empty") from None
            m = sum(1 for name in header if name.startswith("x"))
            k = sum(1 for name in header if name.startswith("y"))
            expected = [f"x{i + 1}" for i in range(m)] + [f"y{j + 1}" for j in range(k)]
            if header != expected or m == 0 or k == 0:
                raise InvalidArguments(
                    f"{path}: header must read x1..xm,y1..yk, got {header!r}"
                )
            rows = []
            for line_no, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != m + k:
                    raise InvalidArguments(f"{path}:{line_no}: expected {m + k} fields")
                try:
                    rows.append([float(v) for v in row])
                except ValueError as exc:
                    raise InvalidArguments(f"{path}:{line_no}: {exc}") from None
        if not rows:
            raise EmptyInput(f"{path} has a header but no samples")
        data = np.asarray(rows, dtype=float)
        return cls(inputs=data[:, :m], responses=data[:, m:])


@dataclass(eq=False)
class ParamModel:
    """A model f: R^m x R^d -> R^k with optional analytic Jacobian.

    ``evaluator(x, p)`` returns the k outputs for one input row; it must be
    reentrant (no shared mutable state) so fits can run concurrently.
    ``analytic_jacobian(x, p)`` returns the k x d matrix of parameter
    derivatives at one input row.
    """

    param_dim: int
    input_dim: int
    output_dim: int
    evaluator: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    analytic_jacobian: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    family: Optional[str] = None

    def predict(self, x, p) -> np.ndarray:
        if self.evaluator is None:
            raise NoEvaluator("model has no evaluator")
        out = np.atleast_1d(np.asarray(self.evaluator(np.asarray(x, dtype=float), p), dtype=float))
        if out.size != self.output_dim:
            raise DimensionMismatch(
                f"evaluator produced {out.size} outputs, expected {self.output_dim}"
            )
        return out

    def predict_all(self, X, p) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.stack([self.predict(x, p) for x in X])

    def descriptor(self) -> dict:
        return {
            "family": self.family or "custom",
            "input_dim": self.input_dim,
            "param_dim": self.param_dim,
            "output_dim": self.output_dim,
        }


def linear_regression_model(input_dim: int) -> ParamModel:
    """Affine single-output model: intercept plus one slope per attribute."""
    if input_dim < 1:
        raise InvalidArguments("need at least one input attribute")
    d = input_dim + 1

    def evaluate(x: np.ndarray, p: np.ndarray) -> np.ndarray:
        return np.array([p[0] + p[1:] @ x])

    def jac(x: np.ndarray, p: np.ndarray) -> np.ndarray:
        # Derivatives do not depend on p for an affine model.
        return np.concatenate(([1.0], x))[None, :]

    return ParamModel(
        param_dim=d,
        input_dim=input_dim,
        output_dim=1,
        evaluator=evaluate,
        analytic_jacobian=jac,
        family="linear_regression",
    )


def _check_params(model: ParamModel, p) -> np.ndarray:
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.size != model.param_dim:
        raise DimensionMismatch(f"model expects {model.param_dim} parameters, got {p.size}")
    return p


def residuals(model: ParamModel, data: Dataset, p) -> np.ndarray:
    """Residual matrix E with E[i, j] = y_ij - f_j(x_i, p)."""
    p = _check_params(model, p)
    if data.input_dim != model.input_dim or data.output_dim != model.output_dim:
        raise DimensionMismatch(
            f"dataset is {data.input_dim}->{data.output_dim}, model is "
            f"{model.input_dim}->{model.output_dim}"
        )
    return data.responses - model.predict_all(data.inputs, p)


def jacobian(
    model: ParamModel,
    data: Dataset,
    p,
    output_index: int = 0,
    step: Optional[float] = None,
) -> np.ndarray:
    """n x d matrix of parameter derivatives of output ``output_index``.

    Uses the analytic Jacobian when the model carries one, otherwise
    forward differences with per-coordinate step h = 1e-6 * max(1, |p_l|).
    """
    p = _check_params(model, p)
    if not 0 <= output_index < model.output_dim:
        raise InvalidArguments(f"output_index {output_index} out of range")
    if data.input_dim != model.input_dim:
        raise DimensionMismatch("dataset inputs do not match the model")

    if model.analytic_jacobian is not None:
        M = np.stack(
            [np.asarray(model.analytic_jacobian(x, p), dtype=float)[output_index]
             for x in data.inputs]
        )
    else:
        if model.evaluator is None:
            raise NoEvaluator("model has neither evaluator nor analytic Jacobian")
        base = np.array([model.predict(x, p)[output_index] for x in data.inputs])
        M = np.empty((data.n, p.size))
        for l in range(p.size):
            h = step if step is not None else FD_STEP * max(1.0, abs(p[l]))
            shifted = p.copy()
            shifted[l] += h
            bumped = np.array([model.predict(x, shifted)[output_index] for x in data.inputs])
            M[:, l] = (bumped - base) / h
    if not np.all(np.isfinite(M)):
        raise NonFiniteValue("model produced NaN or infinity during differentiation")
    return M


def serialized_bit_length(model: ParamModel, p) -> int:
    """Bits needed to ship the fitted model: 64 per parameter plus header."""
    p = _check_params(model, p)
    if not np.all(np.isfinite(p)):
        raise InvalidArguments("parameters must be finite")
    return BITS_PER_PARAM * p.size + HEADER_BITS
