# src/core/database.py
import logging
import sqlite3
import uuid
from datetime import datetime

logger = logging.getLogger('tmss')

MAX_RUNS = 100


class DatabaseManager:
    """Journal of CLI runs. Never read back when producing outputs."""

    def __init__(self, db_path = 'tmss_runs.db'):
        self.db_path = db_path
        self.initialize_database()

    def initialize_database(self):
        """Creates the runs table if it does not exist."""
        logger.debug("Initializing run journal if it does not exist.")
        try:
            with sqlite3.connect(self.db_path, timeout=10) as conn:
                cursor = conn.cursor()
                cursor.execute('''
                    CREATE TABLE IF NOT EXISTS runs (
                        id TEXT PRIMARY KEY,
                        command TEXT,
                        start_time TEXT,
                        end_time TEXT,
                        status TEXT,
                        details TEXT
                    )
                ''')
                conn.commit()
        except Exception:
            logger.exception("Error initializing run journal")
            raise

    def _get_connection(self):
        conn = sqlite3.connect(self.db_path, timeout=10)
        conn.execute("PRAGMA journal_mode=WAL;")
        return conn

    def start_run(self, command, details = ""):
        """Records a new run in 'running' state and returns its id."""
        start_time = datetime.now().isoformat()
        run_id = str(uuid.uuid4())[:8].upper()
        logger.debug(f"Starting run {run_id}: {command} at {start_time}")
        try:
            with self._get_connection() as conn:
                cursor = conn.cursor()
                cursor.execute('''
                    INSERT INTO runs (id, command, start_time, status, details)
                    VALUES (?, ?, ?, ?, ?)
                ''', (run_id, command, start_time, 'running', details))
                conn.commit()
            return run_id
        except Exception:
            logger.exception(f"Failed to record start of run {command}")
            raise

    def finish_run(self, run_id, status, details = ""):
        """Closes a run and prunes the journal to the newest entries."""
        end_time = datetime.now().isoformat()
        logger.debug(f"Finishing run {run_id}, status: {status} at {end_time}")
        try:
            with self._get_connection() as conn:
                cursor = conn.cursor()
                cursor.execute('''UPDATE runs SET end_time = ?, status = ?, details = ? WHERE id = ?''',
                               (end_time, status, details, run_id))
                cursor.execute('''
                    DELETE FROM runs
                    WHERE id NOT IN (
                        SELECT id FROM runs
                        ORDER BY start_time DESC
                        LIMIT ?
                    )
                ''', (MAX_RUNS,))
                conn.commit()
        except Exception:
            logger.exception(f"Error finishing run: {run_id}")
            raise

    def get_runs(self, command = None, page = 1, page_size = 20):
        """Newest runs first, optionally for one command."""
        try:
            with self._get_connection() as conn:
                cursor = conn.cursor()
                query = "SELECT id, command, start_time, end_time, status, details FROM runs"
                params = []
                if command:
                    query += " WHERE command = ?"
                    params.append(command)
                query += " ORDER BY start_time DESC LIMIT ? OFFSET ?"
                params.extend([page_size, (page - 1) * page_size])
                cursor.execute(query, params)
                return cursor.fetchall()
        except Exception:
            logger.exception("Failed to retrieve runs")
            raise

    def clear_runs(self):
        logger.warning("Clearing the run journal.")
        with self._get_connection() as conn:
            conn.execute("DELETE FROM runs")
            conn.commit()
