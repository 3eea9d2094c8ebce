import sys

from genericdim.cli import main

sys.exit(main())
