import os
import sqlite3
import sys

db_path = sys.argv[1] if len(sys.argv) > 1 else os.getenv("WALKLAB_DB_PATH", "reports/runs.db")
if not os.path.exists(db_path):
    print(f"No run ledger at {db_path}")
    sys.exit(0)

conn = sqlite3.connect(db_path)
cursor = conn.execute('''
    SELECT experiment, status, COUNT(*) as runs, MAX(started_at) as last_run
    FROM runs
    GROUP BY experiment, status
    ORDER BY experiment, status
''')

print('Experiment         | Status             | Runs | Last run')
print('-' * 80)
total = 0
for experiment, status, runs, last_run in cursor.fetchall():
    print(f"{experiment:18} | {status:18} | {runs:4} | {last_run}")
    total += runs

print('-' * 80)
print(f'Total recorded runs: {total}')

failed = conn.execute("SELECT run_id, report_path FROM runs WHERE status != 'ok' ORDER BY started_at DESC").fetchall()
if failed:
    print()
    print('Not ok:')
    for run_id, report_path in failed:
        print(f"  {run_id}  {report_path or '-'}")
conn.close()
