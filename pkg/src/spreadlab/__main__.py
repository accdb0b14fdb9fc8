from spreadlab.cli import main

raise SystemExit(main())
