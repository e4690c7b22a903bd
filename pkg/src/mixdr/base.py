"""Estimator plumbing following the scikit-learn parameter protocol.

Estimators keep constructor arguments verbatim as attributes and expose
``get_params`` / ``set_params``, so they compose with pipelines, clones and
grid searches from the wider ecosystem without this package depending on
scikit-learn itself.
"""

import inspect

from .errors import InputError


class ParamsMixin:
    """``get_params`` / ``set_params`` driven by the ``__init__`` signature."""

    @classmethod
    def _param_names(cls):
        sig = inspect.signature(cls.__init__)
        return sorted(
            name for name, par in sig.parameters.items()
            if name != "self"
            and par.kind not in (par.VAR_POSITIONAL, par.VAR_KEYWORD))

    def get_params(self, deep=True):
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params):
        valid = set(self._param_names())
        for name, value in params.items():
            if name not in valid:
                raise InputError(
                    f"invalid parameter {name!r} for {type(self).__name__}")
            setattr(self, name, value)
        return self


def check_is_fitted(estimator, attribute):
    if not hasattr(estimator, attribute):
        raise InputError(
            f"{type(estimator).__name__} is not fitted yet; call fit first",
            code="estimator.unfitted")
