import os


# Dense state vectors hold 2^k complex amplitudes; 24 qubits is the largest
# register that stays within desk memory in double precision.
MAX_QUBIT_CAP = 24

QUBIT_CAP = min(int(os.environ.get("QUANTUM_EXAM_QUBIT_CAP", MAX_QUBIT_CAP)), MAX_QUBIT_CAP)

LOG_LEVEL = os.environ.get("QUANTUM_EXAM_LOG_LEVEL", "WARNING")

ERRORS_URL = "https://github.com/quantum-exam/quantum-exam/blob/main/docs/errors.md"
