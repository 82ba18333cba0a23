"""Makes the ``src`` package importable when pytest runs from the repository root."""
