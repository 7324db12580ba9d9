import json
import os
import sqlite3
from typing import List, Optional, Tuple


class RunStore:
    """Manages the SQLite registry of laboratory runs."""

    def __init__(self, db_path: str = None):
        """Initialize the run store.

        Args:
            db_path: Path to the SQLite database file. If None, uses LATWAVE_DB or
                the default in the home directory.
        """
        if db_path is None:
            db_path = os.environ.get("LATWAVE_DB") or os.path.join(os.path.expanduser("~"), "latwave.db")
        self.db_path = db_path
        self.init_db()

    def init_db(self):
        """Initialize the database with required schema."""
        conn = sqlite3.connect(self.db_path)
        cursor = conn.cursor()
        cursor.execute('''
            CREATE TABLE IF NOT EXISTS runs (
                id INTEGER PRIMARY KEY AUTOINCREMENT,
                subcommand TEXT NOT NULL,
                argv_json TEXT NOT NULL,
                seed INTEGER,
                version TEXT NOT NULL,
                started DATETIME NOT NULL,
                finished DATETIME,
                status INTEGER NOT NULL,
                manifest_path TEXT
            )
        ''')
        cursor.execute('CREATE INDEX IF NOT EXISTS idx_subcommand ON runs(subcommand)')
        conn.commit()
        conn.close()

    def record_run(self, manifest, manifest_path: Optional[str], status: int) -> int:
        """Store one finished run and return its ID."""
        conn = sqlite3.connect(self.db_path)
        cursor = conn.cursor()
        cursor.execute('''
            INSERT INTO runs (subcommand, argv_json, seed, version, started, finished, status, manifest_path)
            VALUES (?, ?, ?, ?, ?, ?, ?, ?)
        ''', (manifest.subcommand, json.dumps(list(manifest.argv)), manifest.seed, manifest.version,
              manifest.started, manifest.finished, status, manifest_path))
        run_id = cursor.lastrowid
        conn.commit()
        conn.close()
        return run_id

    def get_run(self, run_id: int) -> Optional[Tuple]:
        conn = sqlite3.connect(self.db_path)
        cursor = conn.cursor()
        cursor.execute('SELECT * FROM runs WHERE id = ?', (run_id,))
        run = cursor.fetchone()
        conn.close()
        return run

    def list_runs(self, subcommand: str = None) -> List[Tuple]:
        """All runs, newest first, optionally restricted to one subcommand."""
        conn = sqlite3.connect(self.db_path)
        cursor = conn.cursor()
        if subcommand is None:
            cursor.execute('SELECT * FROM runs ORDER BY id DESC')
        else:
            cursor.execute('SELECT * FROM runs WHERE subcommand = ? ORDER BY id DESC', (subcommand,))
        runs = cursor.fetchall()
        conn.close()
        return runs

    def delete_run(self, run_id: int) -> bool:
        conn = sqlite3.connect(self.db_path)
        cursor = conn.cursor()
        cursor.execute('DELETE FROM runs WHERE id = ?', (run_id,))
        deleted = cursor.rowcount > 0
        conn.commit()
        conn.close()
        return deleted
