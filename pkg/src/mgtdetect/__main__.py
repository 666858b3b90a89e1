from mgtdetect.cli import main

main()
