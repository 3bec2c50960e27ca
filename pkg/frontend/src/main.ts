import { ConsoleClient } from "./client.js";
import { ConsoleUi } from "./ui.js";

const proto = location.protocol === "https:" ? "wss" : "ws";
const client = new ConsoleClient(`${proto}://${location.host}/ws`);
new ConsoleUi(client);
client.connect();
