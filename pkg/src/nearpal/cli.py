"""placeholder during development"""
def main():  # pragma: no cover
    raise NotImplementedError
