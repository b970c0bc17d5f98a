# services/__init__.py
# (intencionalmente vazio)