import sys

from labseg.cli import main

sys.exit(main())
