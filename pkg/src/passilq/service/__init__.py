from .app import app, create_app
from .handlers import (
    handle_beam,
    handle_certify,
    handle_discretize,
    handle_lq,
    handle_popov,
    handle_simulate,
)

__all__ = [
    "app",
    "create_app",
    "handle_beam",
    "handle_certify",
    "handle_discretize",
    "handle_lq",
    "handle_popov",
    "handle_simulate",
]
