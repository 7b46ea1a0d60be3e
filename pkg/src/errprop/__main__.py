import sys

from errprop.cli import main

sys.exit(main())
