"""
Run Log - SQLite record of every command invocation.
Keeps command, seed, payload digest, exit code and duration for later audit.
"""

import logging
import os
import sqlite3
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Optional


logger = logging.getLogger(__name__)


@dataclass
class RunEntry:
    """One logged invocation."""
    id: Optional[int]
    timestamp: str
    command: str
    argv: str
    seed: Optional[int]
    digest: Optional[str]
    exit_code: int
    duration_s: float
    output_path: Optional[str]


class RunLog:
    """
    SQLite-based run log.
    Connections are opened per operation; a lock serialises writers.
    """

    def __init__(self, db_path: str = "data/runs.db"):
        self.db_path = db_path
        self._lock = threading.Lock()

        os.makedirs(os.path.dirname(db_path) or ".", exist_ok=True)

        self._init_db()

    def _connect(self) -> sqlite3.Connection:
        return sqlite3.connect(self.db_path)

    def _init_db(self):
        with self._lock:
            conn = self._connect()
            cursor = conn.cursor()

            cursor.execute("""
                CREATE TABLE IF NOT EXISTS runs (
                    id INTEGER PRIMARY KEY AUTOINCREMENT,
                    timestamp TEXT NOT NULL,
                    command TEXT NOT NULL,
                    argv TEXT NOT NULL,
                    seed INTEGER,
                    digest TEXT,
                    exit_code INTEGER NOT NULL,
                    duration_s REAL NOT NULL,
                    output_path TEXT
                )
            """)
            cursor.execute("CREATE INDEX IF NOT EXISTS idx_runs_timestamp ON runs(timestamp)")
            cursor.execute("CREATE INDEX IF NOT EXISTS idx_runs_command ON runs(command)")

            conn.commit()
            conn.close()

        logger.debug(f"Run log ready at {self.db_path}")

    def log_run(
        self,
        command: str,
        argv: list,
        seed: Optional[int],
        digest: Optional[str],
        exit_code: int,
        duration_s: float,
        output_path: Optional[str] = None,
    ) -> int:
        """Insert one invocation and return its row id."""
        timestamp = datetime.now(timezone.utc).isoformat().replace("+00:00", "Z")

        with self._lock:
            conn = self._connect()
            cursor = conn.cursor()
            cursor.execute("""
                INSERT INTO runs
                (timestamp, command, argv, seed, digest, exit_code, duration_s, output_path)
                VALUES (?, ?, ?, ?, ?, ?, ?, ?)
            """, (
                timestamp, command, " ".join(argv), seed, digest,
                int(exit_code), float(duration_s), output_path,
            ))
            run_id = cursor.lastrowid
            conn.commit()
            conn.close()

        logger.debug(f"Logged run #{run_id}: {command} -> exit {exit_code}")
        return run_id

    def get_recent_runs(self, limit: int = 20, command: Optional[str] = None) -> list[RunEntry]:
        query = """
            SELECT id, timestamp, command, argv, seed, digest, exit_code, duration_s, output_path
            FROM runs
        """
        params: tuple = ()
        if command:
            query += " WHERE command = ?"
            params = (command,)
        query += " ORDER BY id DESC LIMIT ?"
        params = params + (limit,)

        with self._lock:
            conn = self._connect()
            rows = conn.execute(query, params).fetchall()
            conn.close()

        return [RunEntry(*row) for row in rows]

    def get_stats(self) -> dict:
        with self._lock:
            conn = self._connect()
            cursor = conn.cursor()

            cursor.execute("SELECT COUNT(*) FROM runs")
            total = cursor.fetchone()[0]

            cursor.execute("SELECT COUNT(*) FROM runs WHERE exit_code != 0")
            failed = cursor.fetchone()[0]

            cursor.execute("SELECT command, COUNT(*) FROM runs GROUP BY command")
            by_command = dict(cursor.fetchall())

            cursor.execute("SELECT COALESCE(SUM(duration_s), 0) FROM runs")
            total_duration = cursor.fetchone()[0]

            conn.close()

        return {
            "total_runs": total,
            "failed_runs": failed,
            "runs_by_command": by_command,
            "total_duration_s": float(total_duration),
        }
