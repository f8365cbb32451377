import logging

try:
    from rich.console import Console
    from rich.logging import RichHandler
    _HAS_RICH = True
except Exception:
    Console = None
    RichHandler = None
    _HAS_RICH = False


def setup_logging(level: str = "INFO") -> None:
    """Configure the root logger on stderr; stdout stays free for reports."""
    lvl = getattr(logging, level.upper(), logging.INFO)
    fmt = "%(asctime)s %(levelname)s %(name)s - %(message)s"
    datefmt = "%Y-%m-%d %H:%M:%S"

    if _HAS_RICH:
        logging.basicConfig(
            level=lvl,
            format="%(message)s",
            datefmt=datefmt,
            handlers=[RichHandler(console=Console(stderr=True), rich_tracebacks=True, show_path=False)],
            force=True,
        )
    else:
        handler = logging.StreamHandler()
        formatter = logging.Formatter(fmt=fmt, datefmt=datefmt)
        handler.setFormatter(formatter)
        logging.basicConfig(level=lvl, handlers=[handler], force=True)


logger = logging.getLogger("mmclt")
