"""plantloop: closed-loop plant-management workbench."""

__version__ = "0.1.0"
