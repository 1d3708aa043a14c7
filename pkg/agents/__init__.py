# agents/__init__.py
