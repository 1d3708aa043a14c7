# inference/__init__.py
