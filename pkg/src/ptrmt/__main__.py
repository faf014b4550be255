import sys

from ptrmt.cli import main

sys.exit(main())
