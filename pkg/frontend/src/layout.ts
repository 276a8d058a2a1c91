/** Small force-directed layout: node repulsion, spring attraction along
 * edges, and a weak pull to the canvas center. Purely presentational. */

import { EdgeEntry, NodeEntry } from "./types.js";

export interface Point {
  x: number;
  y: number;
}

export type Positions = Map<string, Point>;

const REPULSION = 6000;
const SPRING_LENGTH = 110;
const SPRING_STRENGTH = 0.03;
const CENTER_PULL = 0.012;
const DAMPING = 0.82;

export function layoutGraph(
  nodes: NodeEntry[],
  edges: EdgeEntry[],
  width: number,
  height: number,
  previous?: Positions,
  ticks: number = 150,
): Positions {
  const positions: Positions = new Map();
  const velocity = new Map<string, Point>();
  // deterministic initial placement on a circle, reusing prior positions
  nodes.forEach((node, index) => {
    const kept = previous?.get(node.id);
    const angle = (2 * Math.PI * index) / Math.max(nodes.length, 1);
    positions.set(
      node.id,
      kept ?? {
        x: width / 2 + (Math.min(width, height) / 3) * Math.cos(angle),
        y: height / 2 + (Math.min(width, height) / 3) * Math.sin(angle),
      },
    );
    velocity.set(node.id, { x: 0, y: 0 });
  });
  const present = (id: string) => positions.has(id);
  const springs = edges.filter((edge) => present(edge.source) && present(edge.target));

  for (let tick = 0; tick < ticks; tick++) {
    const force = new Map<string, Point>([...positions.keys()].map((id) => [id, { x: 0, y: 0 }]));
    const ids = [...positions.keys()];
    for (let i = 0; i < ids.length; i++) {
      for (let j = i + 1; j < ids.length; j++) {
        const a = positions.get(ids[i])!;
        const b = positions.get(ids[j])!;
        let dx = a.x - b.x;
        let dy = a.y - b.y;
        let d2 = dx * dx + dy * dy;
        if (d2 < 1) {
          dx = (i - j) * 0.1 || 0.1;
          dy = 0.1;
          d2 = dx * dx + dy * dy;
        }
        const push = REPULSION / d2;
        const d = Math.sqrt(d2);
        force.get(ids[i])!.x += (dx / d) * push;
        force.get(ids[i])!.y += (dy / d) * push;
        force.get(ids[j])!.x -= (dx / d) * push;
        force.get(ids[j])!.y -= (dy / d) * push;
      }
    }
    for (const edge of springs) {
      const a = positions.get(edge.source)!;
      const b = positions.get(edge.target)!;
      const dx = b.x - a.x;
      const dy = b.y - a.y;
      const d = Math.max(Math.sqrt(dx * dx + dy * dy), 0.1);
      const pull = SPRING_STRENGTH * (d - SPRING_LENGTH);
      force.get(edge.source)!.x += (dx / d) * pull;
      force.get(edge.source)!.y += (dy / d) * pull;
      force.get(edge.target)!.x -= (dx / d) * pull;
      force.get(edge.target)!.y -= (dy / d) * pull;
    }
    for (const id of ids) {
      const p = positions.get(id)!;
      const f = force.get(id)!;
      f.x += (width / 2 - p.x) * CENTER_PULL;
      f.y += (height / 2 - p.y) * CENTER_PULL;
      const v = velocity.get(id)!;
      v.x = (v.x + f.x) * DAMPING;
      v.y = (v.y + f.y) * DAMPING;
      p.x = Math.min(Math.max(p.x + v.x, 20), width - 20);
      p.y = Math.min(Math.max(p.y + v.y, 20), height - 20);
    }
  }
  return positions;
}
