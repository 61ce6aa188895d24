import sys

from rdcnet.cli import main

sys.exit(main())
