import sys

from ipsw.cli import main

sys.exit(main())
