// Board helpers mirroring the server's conventions: 9 cells row-major,
// 0 is the blank, goal is 1-8 clockwise with the blank centered.

export const GOAL: readonly number[] = [1, 2, 3, 8, 0, 4, 7, 6, 5];

const ADJACENT: readonly number[][] = [
  [1, 3],
  [0, 2, 4],
  [1, 5],
  [0, 4, 6],
  [1, 3, 5, 7],
  [2, 4, 8],
  [3, 7],
  [4, 6, 8],
  [5, 7],
];

export function blankIndex(board: readonly number[]): number {
  return board.indexOf(0);
}

/** Tiles that may slide into the blank; exactly these cells are clickable. */
export function adjacentTiles(board: readonly number[]): Set<number> {
  const tiles = new Set<number>();
  for (const i of ADJACENT[blankIndex(board)]) {
    tiles.add(board[i]);
  }
  return tiles;
}

export function isGoal(board: readonly number[]): boolean {
  return board.length === 9 && board.every((v, i) => v === GOAL[i]);
}
