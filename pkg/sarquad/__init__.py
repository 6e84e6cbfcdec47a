import os

# Keep the console output of the CLI free of the pygame banner
os.environ.setdefault("PYGAME_HIDE_SUPPORT_PROMPT", "1")
