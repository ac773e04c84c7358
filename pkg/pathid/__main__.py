import sys

from pathid.app.main import main

sys.exit(main())
