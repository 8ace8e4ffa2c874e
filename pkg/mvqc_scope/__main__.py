import sys

from mvqc_scope.cli import main

if __name__ == "__main__":
    sys.exit(main())
