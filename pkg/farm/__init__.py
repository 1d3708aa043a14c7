# farm/__init__.py
