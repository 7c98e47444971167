import sys

from nklfm.cli import main

sys.exit(main())
