// Playback over a recorded list of server messages, used to verify that
// rendering a transcript reproduces the score the server reported.

import { ServerMsg } from "./protocol.js";

export interface PlaybackResult {
  frames: number;
  finalScore: number;
  roundScores: number[];
}

export function playback(messages: ServerMsg[]): PlaybackResult {
  let frames = 0;
  let finalScore = 0;
  let roundScores: number[] = [];
  for (const msg of messages) {
    if (msg.type === "state") {
      frames += 1;
      finalScore = msg.score;
    } else if (msg.type === "round_end") {
      roundScores = msg.scores;
    }
  }
  return { frames, finalScore, roundScores };
}
