from strokeminer.cli import app

app(prog_name="strokeminer")
