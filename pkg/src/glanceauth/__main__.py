from glanceauth.cli import entrypoint

entrypoint()
