"""Allow running wafom-nets as a module with python -m wafom_nets."""

from .cli import main

if __name__ == '__main__':
    main()
