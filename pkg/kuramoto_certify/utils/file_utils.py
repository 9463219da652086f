import csv
import logging
import os
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

from kuramoto_certify.engines.dynamics_engine import PhaseState, Trajectory
from kuramoto_certify.engines.graph_engine import Graph, GraphEngine
from kuramoto_certify.exceptions import GraphFormatError

logger = logging.getLogger("kuramoto_certify.files")

PathLike = Union[str, Path]


class FileUtils:
    """图 / 相位 / 轨迹文件读写及 CSV 输出"""

    @staticmethod
    def _ensure_parent(path: PathLike) -> Path:
        path = Path(path)
        if path.parent and not path.parent.exists():
            os.makedirs(path.parent, exist_ok=True)
        return path

    # --- 图文件 ---
    @staticmethod
    def parse_graph(text: str, check_connected: bool = True) -> Graph:
        """
        解析邻接表格式：
            n <n> self_loops <0|1>
            j: k1 k2 ...      (0 起始，通常只列 k > j 的邻居)
        k <= j 的条目必须与之前声明的边一致，否则视为不对称
        """
        lines = [(no, line.split("#", 1)[0].strip()) for no, line in enumerate(text.splitlines(), start=1)]
        lines = [(no, line) for no, line in lines if line]
        if not lines:
            raise GraphFormatError("empty graph file")

        no, header = lines[0]
        parts = header.split()
        if len(parts) != 4 or parts[0] != "n" or parts[2] != "self_loops":
            raise GraphFormatError("header must read 'n <n> self_loops <0|1>'", no)
        try:
            n = int(parts[1])
            loops = int(parts[3])
        except ValueError as exc:
            raise GraphFormatError(f"bad header values: {exc}", no) from exc
        if n < 1 or loops not in (0, 1):
            raise GraphFormatError(f"invalid header n={n} self_loops={loops}", no)

        adj = np.zeros((n, n), dtype=bool)
        seen = set()
        for no, line in lines[1:]:
            head, sep, tail = line.partition(":")
            if not sep:
                raise GraphFormatError("expected '<j>: <neighbours>'", no)
            try:
                j = int(head)
                neighbours = [int(tok) for tok in tail.split()]
            except ValueError as exc:
                raise GraphFormatError(f"non-integer entry: {exc}", no) from exc
            if not 0 <= j < n:
                raise GraphFormatError(f"node {j} out of range 0..{n - 1}", no)
            if j in seen:
                raise GraphFormatError(f"node {j} listed twice", no)
            seen.add(j)
            for k in neighbours:
                if not 0 <= k < n:
                    raise GraphFormatError(f"neighbour {k} out of range 0..{n - 1}", no)
                if k <= j:
                    # 下三角条目只允许与已声明的边一致
                    if not adj[k, j]:
                        raise GraphFormatError(f"asymmetric entry {j}->{k}: {k} does not list {j}", no)
                    continue
                adj[j, k] = adj[k, j] = True
        if len(seen) != n:
            missing = sorted(set(range(n)) - seen)[:5]
            raise GraphFormatError(f"expected {n} node lines, missing e.g. {missing}")
        return GraphEngine.from_adjacency(adj, self_loops=bool(loops), check_connected=check_connected)

    @staticmethod
    def load_graph(path: PathLike, check_connected: bool = True) -> Graph:
        with open(path, "r", encoding="utf-8") as fh:
            g = FileUtils.parse_graph(fh.read(), check_connected=check_connected)
        logger.info("已读取图 %s: %r", path, g)
        return g

    @staticmethod
    def format_graph(g: Graph) -> str:
        rows = [f"n {g.n} self_loops {int(g.self_loops)}"]
        for j in range(g.n):
            upper = np.nonzero(g.adjacency[j, j + 1:])[0] + j + 1
            rows.append(f"{j}: " + " ".join(str(k) for k in upper) if upper.size else f"{j}:")
        return "\n".join(rows) + "\n"

    @staticmethod
    def save_graph(g: Graph, path: PathLike) -> Path:
        path = FileUtils._ensure_parent(path)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(FileUtils.format_graph(g))
        return path

    # --- 相位文件：空白或换行分隔的弧度值，'#' 起注释 ---
    @staticmethod
    def parse_state(text: str) -> PhaseState:
        values = []
        for no, line in enumerate(text.splitlines(), start=1):
            body = line.split("#", 1)[0].replace(",", " ").split()
            try:
                values.extend(float(tok) for tok in body)
            except ValueError as exc:
                raise GraphFormatError(f"non-numeric phase: {exc}", no) from exc
        if not values:
            raise GraphFormatError("state file contains no phases")
        theta = np.array(values)
        if not np.all(np.isfinite(theta)):
            raise GraphFormatError("state file contains non-finite phases")
        return PhaseState(theta)

    @staticmethod
    def load_state(path: PathLike) -> PhaseState:
        with open(path, "r", encoding="utf-8") as fh:
            return FileUtils.parse_state(fh.read())

    @staticmethod
    def save_state(s: PhaseState, path: PathLike) -> Path:
        path = FileUtils._ensure_parent(path)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"# n = {s.n}\n")
            fh.writelines(f"{value:.17g}\n" for value in s.theta)
        return path

    # --- CSV ---
    @staticmethod
    def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
        path = FileUtils._ensure_parent(path)
        count = 0
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow(["" if value is None else value for value in row])
                count += 1
        logger.info("已写出 %s (%d 行)", path, count)
        return path

    @staticmethod
    def trajectory_rows(trajectory: Trajectory):
        header = ["t"] + [f"theta_{j}" for j in range(trajectory.thetas.shape[1])] + ["energy", "rho1_abs"]
        rho1 = trajectory.rho1_abs
        rows = (
            [repr(float(t))] + [repr(float(v)) for v in theta] + [repr(float(e)), repr(float(r))]
            for t, theta, e, r in zip(trajectory.times, trajectory.thetas, trajectory.energies, rho1)
        )
        return header, rows

    @staticmethod
    def write_trajectory_csv(trajectory: Trajectory, path: PathLike) -> Path:
        header, rows = FileUtils.trajectory_rows(trajectory)
        return FileUtils.write_csv(path, header, rows)
