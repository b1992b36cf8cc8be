import sys

from harnack_lab.cli.main import main

if __name__ == "__main__":
    sys.exit(main())
